use std::collections::BTreeMap;
use std::fmt::Write as _;

use friendlab_core::checkers::{FlagReport, TheoremReport};
use friendlab_core::feasibility::{FeasibilityResult, PossibilisticResult};
use friendlab_core::predict::CorrelatorSet;
use friendlab_core::JointDistribution;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const SCHEMA: &str = "friendlab-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    /// The effective config, overrides applied; re-running it reproduces
    /// everything but `timings`.
    pub config: RunConfig,
    pub sections: Sections,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sections {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Predictions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Feasibility>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Simulation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDistribution {
    pub name: String,
    pub distribution: JointDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Predictions {
    pub scenario: String,
    pub contexts: Vec<NamedDistribution>,
    pub friend_joint: JointDistribution,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<NamedDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlators: Option<CorrelatorSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chsh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parities: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParitySearch {
    pub parities: [f64; 4],
    pub signs: [i8; 4],
    pub variables: Vec<String>,
    pub assignments: Vec<[i8; 6]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feasibility {
    /// No single assignment of every variable reproduces the targets.
    pub contradiction: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<FeasibilityResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParitySearch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub possibilistic: Option<PossibilisticResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSummary {
    pub model: String,
    pub context: String,
    /// File name inside the batch directory.
    pub file: String,
    pub records: usize,
    pub sha256: String,
    /// Fraction of Null values per event key.
    pub null_fraction: BTreeMap<String, f64>,
    /// Largest cell gap between empirical and analytic record
    /// distributions, when the model has an analytic one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_delta: Option<f64>,
    /// Largest gap between empirical and unitary correlators over every
    /// nonempty subset of the context's observed variables.
    pub fpu_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub scenario: String,
    pub batches: Vec<BatchSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mismatch {
    pub model: String,
    /// Flag name, or `disaccord`.
    pub item: String,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: expected {}, got {}",
            self.model, self.item, self.expected, self.actual
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verification {
    pub matches_baseline: bool,
    pub mismatches: Vec<Mismatch>,
    /// Every flag of every model reached the same verdict on all paths.
    pub paths_agree: bool,
    pub theorem: TheoremReport,
}

impl Verification {
    pub fn row(&self, model: &str) -> Option<&FlagReport> {
        self.theorem.rows.iter().find(|r| r.model == model)
    }
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema: SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            sections: Sections::default(),
            timings: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: Report = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        if r.schema != SCHEMA {
            return Err(CliError::Input(format!("unsupported schema `{}`", r.schema)));
        }
        Ok(r)
    }

    /// The report with timings cleared, for comparing two runs.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn to_value(&self) -> Result<Value, CliError> {
        serde_json::to_value(self).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Encode(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Md => Ok(markdown(&self.to_value()?)),
        }
    }
}

/// Markdown view of a report's JSON form. Every leaf is printed with the
/// JSON encoder, so each number reads exactly as in the JSON rendering.
pub fn markdown(report: &Value) -> String {
    let mut out = String::new();
    let text = |k: &str| report.get(k).and_then(Value::as_str).unwrap_or("").to_string();
    let _ = writeln!(out, "# friendlab {} report\n", text("command"));
    let _ = writeln!(out, "- schema: `{}`", text("schema"));
    let _ = writeln!(out, "- tool version: `{}`", text("tool_version"));
    for key in ["config", "sections", "timings"] {
        let Some(v) = report.get(key) else { continue };
        match (key, v) {
            ("sections", Value::Object(map)) => {
                for (name, section) in map {
                    let _ = writeln!(out, "\n## {name}\n");
                    table(&mut out, &format!("/sections/{name}"), section);
                }
            }
            _ => {
                let _ = writeln!(out, "\n## {key}\n");
                table(&mut out, &format!("/{key}"), v);
            }
        }
    }
    out
}

fn table(out: &mut String, root: &str, v: &Value) {
    let mut rows = Vec::new();
    flatten(root, v, &mut rows);
    out.push_str("| field | value |\n|---|---|\n");
    for (path, leaf) in rows {
        let _ = writeln!(out, "| `{path}` | {} |", escape_cell(&leaf));
    }
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

/// `(JSON pointer, encoded leaf)` pairs. Arrays of scalars stay on one row.
/// Keys must not contain backticks or line breaks.
pub fn flatten(path: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                flatten(&format!("{path}/{}", pointer_escape(k)), child, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{path}/{i}"), child, out);
            }
        }
        _ => out.push((path.to_string(), v.to_string())),
    }
}

fn pointer_escape(k: &str) -> String {
    k.replace('~', "~0").replace('/', "~1")
}

/// Reads back the `(pointer, value)` rows of [`markdown`] output.
pub fn parse_markdown_rows(md: &str) -> Vec<(String, Value)> {
    md.lines()
        .filter_map(|line| {
            let rest = line.strip_prefix("| `")?;
            let (path, rest) = rest.split_once("` | ")?;
            let cell = rest.strip_suffix(" |")?.replace("\\|", "|");
            Some((path.to_string(), serde_json::from_str(&cell).ok()?))
        })
        .collect()
}
