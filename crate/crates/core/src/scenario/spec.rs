//! Serializable scenario descriptions as they appear in run configs.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    build_bong, build_lawrence, build_ormrod_barrett, build_wigner_friend, MerminBasis,
    OptionKind, Scenario, ScenarioError, ScenarioKind,
};
use crate::feasibility::{hardy_search, hardy_search_for_state, FeasibilityError, HardyConfig};
use crate::quantum::{PureState, QubitObservable};

/// Tolerance on the norm of an explicit amplitude list before it is
/// renormalized.
const AMPLITUDE_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("unknown state preset `{0}`")]
    UnknownPreset(String),
    #[error("bad argument in state preset `{0}`")]
    PresetArgument(String),
    #[error("amplitude list: {0}")]
    Amplitudes(String),
    #[error("state `{state}` is not allowed for scenario {kind}")]
    StateNotAllowed { kind: ScenarioKind, state: String },
    #[error("unknown angle `{key}` for scenario {kind} (expected one of {expected})")]
    UnknownAngle {
        kind: ScenarioKind,
        key: String,
        expected: String,
    },
    #[error("angle `{0}` is not finite")]
    NonFiniteAngle(String),
    #[error("angle `{0}` is required for this state")]
    MissingAngle(String),
    #[error("`{field}` is not used by scenario {kind}")]
    FieldNotAllowed { kind: ScenarioKind, field: String },
    #[error("expected three bases, got {0}")]
    BasisCount(usize),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
}

/// A parsed state preset or explicit amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Zero,
    One,
    Plus,
    Minus,
    Singlet,
    Ghz,
    /// The state maximizing the Hardy probability, found by search.
    Hardy,
    /// `cos t |00⟩ + sin t |11⟩`.
    HardyFamily(f64),
    Amplitudes(Vec<Complex64>),
}

impl FromStr for StateSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "zero" => StateSpec::Zero,
            "one" => StateSpec::One,
            "plus" => StateSpec::Plus,
            "minus" => StateSpec::Minus,
            "singlet" => StateSpec::Singlet,
            "ghz" => StateSpec::Ghz,
            "hardy" => StateSpec::Hardy,
            _ => {
                let arg = s
                    .strip_prefix("hardy(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| SpecError::UnknownPreset(s.to_string()))?;
                let t: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| SpecError::PresetArgument(s.to_string()))?;
                if !t.is_finite() {
                    return Err(SpecError::PresetArgument(s.to_string()));
                }
                StateSpec::HardyFamily(t)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeValue {
    Real(f64),
    /// `[re, im]`
    Complex([f64; 2]),
}

impl AmplitudeValue {
    fn value(&self) -> Complex64 {
        match *self {
            AmplitudeValue::Real(re) => Complex64::new(re, 0.0),
            AmplitudeValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateValue {
    Preset(String),
    Amplitudes(Vec<AmplitudeValue>),
}

impl StateValue {
    pub fn parse(&self) -> Result<StateSpec, SpecError> {
        match self {
            StateValue::Preset(s) => s.parse(),
            StateValue::Amplitudes(v) => {
                let amps: Vec<Complex64> = v.iter().map(AmplitudeValue::value).collect();
                if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                    return Err(SpecError::Amplitudes("non-finite entry".into()));
                }
                Ok(StateSpec::Amplitudes(amps))
            }
        }
    }
}

impl StateSpec {
    /// Builds the state over `labels`. The Hardy preset resolves through
    /// `hardy`.
    fn state(&self, labels: &[&str], hardy: Option<&HardyConfig>) -> Result<PureState, SpecError> {
        let one = |bit| -> Result<PureState, SpecError> {
            if labels.len() != 1 {
                return Err(ScenarioError::WrongStateSize {
                    expected: labels.len(),
                    got: 1,
                }
                .into());
            }
            Ok(PureState::basis(labels[0], bit))
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Ok(match self {
            StateSpec::Zero => one(0)?,
            StateSpec::One => one(1)?,
            StateSpec::Plus => {
                one(0)?;
                PureState::plus(labels[0])
            }
            StateSpec::Minus => {
                one(0)?;
                PureState::from_real(labels, &[r, -r]).map_err(ScenarioError::from)?
            }
            StateSpec::Singlet => {
                if labels.len() != 2 {
                    return Err(ScenarioError::WrongStateSize {
                        expected: labels.len(),
                        got: 2,
                    }
                    .into());
                }
                PureState::singlet(labels[0], labels[1])
            }
            StateSpec::Ghz => PureState::ghz(labels),
            StateSpec::Hardy => {
                let cfg = hardy.expect("hardy configuration resolved by caller");
                cfg.state("x", "y").relabeled(labels).map_err(ScenarioError::from)?
            }
            StateSpec::HardyFamily(t) => {
                let (s, c) = t.sin_cos();
                PureState::from_real(&["x", "y"], &[c, 0.0, 0.0, s])
                    .and_then(|p| p.relabeled(labels))
                    .map_err(ScenarioError::from)?
            }
            StateSpec::Amplitudes(amps) => {
                let expected = 1usize << labels.len();
                if amps.len() != expected {
                    return Err(SpecError::Amplitudes(format!(
                        "{} entries, expected {expected}",
                        amps.len()
                    )));
                }
                let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if (norm - 1.0).abs() > AMPLITUDE_NORM_TOLERANCE {
                    return Err(SpecError::Amplitudes(format!("squared norm {norm} is not 1")));
                }
                PureState::normalized(labels.iter().map(|s| s.to_string()).collect(), amps.clone())
                    .map_err(ScenarioError::from)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySettings {
    #[serde(default = "HardySettings::default_resolution")]
    pub resolution: usize,
    #[serde(default = "HardySettings::default_refinement")]
    pub refinement: usize,
}

impl HardySettings {
    fn default_resolution() -> usize {
        10
    }

    fn default_refinement() -> usize {
        400
    }
}

impl Default for HardySettings {
    fn default() -> Self {
        Self {
            resolution: Self::default_resolution(),
            refinement: Self::default_refinement(),
        }
    }
}

/// A scenario as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateValue>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub angles: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_bases: Option<Vec<MerminBasis>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_bases: Option<Vec<MerminBasis>>,
    /// Superobserver name to allowed option kinds.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub menus: BTreeMap<String, Vec<OptionKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardy: Option<HardySettings>,
}

fn angle_keys(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::Wigner => &["friend", "super"],
        ScenarioKind::Bong | ScenarioKind::OrmrodBarrett => &["c", "d", "a", "b"],
        ScenarioKind::Lawrence => &[],
    }
}

/// Default CHSH-optimal angles on the singlet.
pub const BONG_DEFAULT_ANGLES: [(&str, f64); 4] = [
    ("c", 0.0),
    ("d", FRAC_PI_4),
    ("a", FRAC_PI_2),
    ("b", 3.0 * FRAC_PI_4),
];

impl ScenarioSpec {
    /// The default configuration of a scenario kind.
    pub fn preset(kind: ScenarioKind) -> Self {
        Self {
            kind,
            state: None,
            angles: BTreeMap::new(),
            a_bases: None,
            b_bases: None,
            menus: BTreeMap::new(),
            hardy: None,
        }
    }

    fn check_fields(&self) -> Result<(), SpecError> {
        let keys = angle_keys(self.kind);
        for (key, value) in &self.angles {
            if !keys.contains(&key.as_str()) {
                return Err(SpecError::UnknownAngle {
                    kind: self.kind,
                    key: key.clone(),
                    expected: if keys.is_empty() {
                        "none".into()
                    } else {
                        keys.join(", ")
                    },
                });
            }
            if !value.is_finite() {
                return Err(SpecError::NonFiniteAngle(key.clone()));
            }
        }
        let not_allowed = |field: &str| SpecError::FieldNotAllowed {
            kind: self.kind,
            field: field.into(),
        };
        if self.kind != ScenarioKind::Lawrence {
            if self.a_bases.is_some() {
                return Err(not_allowed("a_bases"));
            }
            if self.b_bases.is_some() {
                return Err(not_allowed("b_bases"));
            }
        }
        if self.hardy.is_some() && self.kind != ScenarioKind::OrmrodBarrett {
            return Err(not_allowed("hardy"));
        }
        Ok(())
    }

    fn state_spec(&self, default: StateSpec) -> Result<StateSpec, SpecError> {
        self.state.as_ref().map_or(Ok(default), StateValue::parse)
    }

    fn angle(&self, key: &str, default: f64) -> f64 {
        self.angles.get(key).copied().unwrap_or(default)
    }

    fn bases(field: &Option<Vec<MerminBasis>>, default: MerminBasis) -> Result<[MerminBasis; 3], SpecError> {
        match field {
            None => Ok([default; 3]),
            Some(v) => v
                .as_slice()
                .try_into()
                .map_err(|_| SpecError::BasisCount(v.len())),
        }
    }

    /// Validates the spec and builds the scenario.
    pub fn build(&self) -> Result<Scenario, SpecError> {
        self.check_fields()?;
        let scenario = match self.kind {
            ScenarioKind::Wigner => {
                let spec = self.state_spec(StateSpec::Plus)?;
                let state = spec.state(&["S"], None)?;
                let friend = self.angle("friend", 0.0);
                let sup = match self.angles.get("super") {
                    Some(&a) => a,
                    None => QubitObservable::aligned_with(&state)
                        .map_err(|_| SpecError::MissingAngle("super".into()))?
                        .angle(),
                };
                build_wigner_friend(&state, friend, sup)?
            }
            ScenarioKind::Bong => {
                let spec = self.state_spec(StateSpec::Singlet)?;
                let hardy = self.resolve_hardy(&spec, None)?;
                let state = spec.state(&["x", "y"], hardy.as_ref())?;
                let [c, d, a, b] = BONG_DEFAULT_ANGLES.map(|(k, v)| self.angle(k, v));
                build_bong(&state, c, d, a, b)?
            }
            ScenarioKind::Lawrence => {
                if let Some(state) = &self.state {
                    if state.parse()? != StateSpec::Ghz {
                        return Err(SpecError::StateNotAllowed {
                            kind: self.kind,
                            state: format!("{state:?}"),
                        });
                    }
                }
                build_lawrence(
                    Self::bases(&self.a_bases, MerminBasis::Y)?,
                    Self::bases(&self.b_bases, MerminBasis::X)?,
                )?
            }
            ScenarioKind::OrmrodBarrett => {
                let spec = self.state_spec(StateSpec::Hardy)?;
                let settings = self.hardy.unwrap_or_default();
                let all_given = angle_keys(self.kind)
                    .iter()
                    .all(|k| self.angles.contains_key(*k));
                let hardy = self.resolve_hardy(&spec, Some(settings))?;
                let state = spec.state(&["x", "y"], hardy.as_ref())?;
                let searched = if all_given {
                    None
                } else if let Some(h) = hardy {
                    Some(h)
                } else {
                    Some(hardy_search_for_state(&state, settings.resolution, settings.refinement)?)
                };
                let pick = |key: &str, from: fn(&HardyConfig) -> f64| -> Result<f64, SpecError> {
                    match (self.angles.get(key), &searched) {
                        (Some(&v), _) => Ok(v),
                        (None, Some(h)) => Ok(from(h)),
                        (None, None) => Err(SpecError::MissingAngle(key.into())),
                    }
                };
                build_ormrod_barrett(
                    &state,
                    pick("c", |h| h.c)?,
                    pick("d", |h| h.d)?,
                    pick("a", |h| h.a)?,
                    pick("b", |h| h.b)?,
                )?
            }
        };
        if self.menus.is_empty() {
            return Ok(scenario);
        }
        let restrict: Vec<(&str, Vec<OptionKind>)> = self
            .menus
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        Ok(scenario.with_menus(&restrict)?)
    }

    fn resolve_hardy(
        &self,
        spec: &StateSpec,
        settings: Option<HardySettings>,
    ) -> Result<Option<HardyConfig>, SpecError> {
        if *spec != StateSpec::Hardy {
            return Ok(None);
        }
        let s = settings.unwrap_or_default();
        Ok(Some(hardy_search(s.resolution, s.refinement)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets() {
        assert_eq!("singlet".parse::<StateSpec>().unwrap(), StateSpec::Singlet);
        assert_eq!(
            "hardy(0.25)".parse::<StateSpec>().unwrap(),
            StateSpec::HardyFamily(0.25)
        );
        assert!(matches!(
            "hardy(x)".parse::<StateSpec>(),
            Err(SpecError::PresetArgument(_))
        ));
        assert!(matches!(
            "bell".parse::<StateSpec>(),
            Err(SpecError::UnknownPreset(_))
        ));
        assert!("hardy(inf)".parse::<StateSpec>().is_err());
    }

    #[test]
    fn unknown_angle_is_rejected() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Bong);
        spec.angles.insert("e".into(), 0.1);
        assert!(matches!(spec.build(), Err(SpecError::UnknownAngle { .. })));
    }

    #[test]
    fn lawrence_refuses_other_states() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Lawrence);
        spec.state = Some(StateValue::Preset("singlet".into()));
        assert!(matches!(spec.build(), Err(SpecError::StateNotAllowed { .. })));
    }

    #[test]
    fn explicit_amplitudes_must_be_normalized() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Bong);
        spec.state = Some(StateValue::Amplitudes(vec![AmplitudeValue::Real(1.0); 4]));
        assert!(matches!(spec.build(), Err(SpecError::Amplitudes(_))));
    }

    #[test]
    fn menus_restrict_contexts() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Bong);
        spec.menus.insert("Alice".into(), vec![OptionKind::Super]);
        assert_eq!(spec.build().unwrap().contexts().len(), 2);
    }

    #[test]
    fn wigner_super_defaults_to_the_state_direction() {
        let s = ScenarioSpec::preset(ScenarioKind::Wigner).build().unwrap();
        assert!((s.wings()[0].menu.super_angle().unwrap() - FRAC_PI_2).abs() < 1e-12);
    }
}
