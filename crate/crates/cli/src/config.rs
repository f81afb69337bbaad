use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use friendlab_core::checkers::{CheckSettings, DisaccordType, Verdict};
use friendlab_core::models::{ModelSpec, MODEL_NAMES};
use friendlab_core::scenario::{ScenarioKind, ScenarioSpec};
use friendlab_core::stats;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Md,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: Format,
}

fn default_samples() -> usize {
    100_000
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: None,
            format: Format::Json,
        }
    }
}

/// Accepted range of `[tolerances] analytic`.
pub const ANALYTIC_RANGE: (f64, f64) = (1e-15, 1e-3);
/// Accepted range of `[tolerances] significance`.
pub const SIGNIFICANCE_RANGE: (f64, f64) = (1e-12, 0.05);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Per-cell equality tolerance on analytic paths.
    #[serde(default = "default_analytic")]
    pub analytic: f64,
    /// Family-wise level of each statistical verdict.
    #[serde(default = "default_significance")]
    pub significance: f64,
}

fn default_analytic() -> f64 {
    friendlab_core::tolerance::COMPOSED
}

fn default_significance() -> f64 {
    stats::SIGNIFICANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            analytic: default_analytic(),
            significance: default_significance(),
        }
    }
}

/// Expected verdicts of one model. Flags left out are not compared.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BaselineEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aoe1: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aoe2: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_person_universality: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_superdeterminism: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paradox_freedom: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disaccord: Option<Vec<DisaccordType>>,
}

impl BaselineEntry {
    /// `(flag name, expected verdict)` for every flag listed.
    pub fn flags(&self) -> Vec<(&'static str, Verdict)> {
        [
            ("aoe1", self.aoe1),
            ("aoe2", self.aoe2),
            ("first-person-universality", self.first_person_universality),
            ("locality", self.locality),
            ("no-superdeterminism", self.no_superdeterminism),
            ("paradox-freedom", self.paradox_freedom),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub baseline: BTreeMap<String, BaselineEntry>,
    /// Pair tables that replace the predictions in `feasibility`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<TargetTable>,
}

/// A `±1` table as written in a config: cells in binary order, `+1` first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTable {
    pub variables: Vec<String>,
    pub probabilities: Vec<f64>,
}

const PRESETS: [(&str, &str); 4] = [
    ("wigner", include_str!("../presets/wigner.toml")),
    ("bong", include_str!("../presets/bong.toml")),
    ("lawrence", include_str!("../presets/lawrence.toml")),
    ("ormrod-barrett", include_str!("../presets/ormrod-barrett.toml")),
];

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let config: RunConfig = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    /// The shipped configuration of a named scenario, with its baseline.
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let kind = ScenarioKind::from_id(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown scenario `{name}` (expected one of {})",
                PRESETS.map(|p| p.0).join(", ")
            ))
        })?;
        let text = PRESETS
            .iter()
            .find(|(id, _)| *id == kind.id())
            .map(|(_, t)| *t)
            .expect("every kind has a preset");
        text.parse()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.run.samples == 0 {
            return Err(CliError::Usage("`run.samples` must be at least 1".into()));
        }
        let in_range = |v: f64, (lo, hi): (f64, f64)| v.is_finite() && v >= lo && v <= hi;
        if !in_range(self.tolerances.analytic, ANALYTIC_RANGE) {
            return Err(CliError::Usage(format!(
                "`tolerances.analytic` = {} is outside [{:e}, {:e}]",
                self.tolerances.analytic, ANALYTIC_RANGE.0, ANALYTIC_RANGE.1
            )));
        }
        if !in_range(self.tolerances.significance, SIGNIFICANCE_RANGE) {
            return Err(CliError::Usage(format!(
                "`tolerances.significance` = {} is outside [{:e}, {:e}]",
                self.tolerances.significance, SIGNIFICANCE_RANGE.0, SIGNIFICANCE_RANGE.1
            )));
        }
        for m in &self.models {
            if !MODEL_NAMES.contains(&m.name.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown model `{}` (expected one of {})",
                    m.name,
                    MODEL_NAMES.join(", ")
                )));
            }
        }
        let specs = self.model_specs();
        for (i, m) in specs.iter().enumerate() {
            if specs[..i].iter().any(|x| x.name == m.name) {
                return Err(CliError::Usage(format!("model `{}` is listed twice", m.name)));
            }
        }
        for name in self.baseline.keys() {
            if !specs.iter().any(|m| &m.name == name) {
                return Err(CliError::Usage(format!("baseline for `{name}`, which is not among [[models]]")));
            }
        }
        Ok(())
    }

    /// Models to run; every known model when none is configured.
    pub fn model_specs(&self) -> Vec<ModelSpec> {
        if self.models.is_empty() {
            MODEL_NAMES.iter().map(|n| ModelSpec::named(n)).collect()
        } else {
            self.models.clone()
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.run.seed.ok_or(CliError::MissingSeed)
    }

    pub fn check_settings(&self) -> Result<CheckSettings, CliError> {
        Ok(CheckSettings {
            samples: self.run.samples,
            seed: self.seed()?,
            significance: self.tolerances.significance,
            analytic_tolerance: self.tolerances.analytic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_builds() {
        for kind in ScenarioKind::ALL {
            let c = RunConfig::preset(kind.id()).unwrap();
            assert_eq!(c.scenario.kind, kind);
            assert!(c.run.seed.is_some());
            c.scenario.build().unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = "[scenario]\nkind = \"bong\"\ncolour = 3\n".parse::<RunConfig>().unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err:?}");
        let err = "[scenario]\nkind = \"bong\"\n[run]\nsede = 1\n".parse::<RunConfig>().unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err:?}");
    }

    #[test]
    fn tolerances_are_range_checked() {
        let err = "[scenario]\nkind = \"bong\"\n[tolerances]\nanalytic = 0.5\n"
            .parse::<RunConfig>()
            .unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::preset("bong").unwrap();
        let again: RunConfig = c.to_toml().unwrap().parse().unwrap();
        assert_eq!(c, again);
    }
}
