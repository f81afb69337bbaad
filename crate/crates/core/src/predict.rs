//! Predictions of unitary quantum mechanics for the named scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::DistributionError;
use crate::quantum::{
    apply_dilation, born_distribution, effective_wing_observable, ProjectiveMeasurement,
    QuantumError,
};
use crate::record::{EventKey, Outcome, RunBatch};
use crate::scenario::{Context, Event, MenuOption, OptionKind, Scenario, ScenarioError, ScenarioKind};
use crate::{tolerance, JointDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("dilation and effective-observable predictions differ by {deviation:e} in context {context}")]
    PathMismatch { context: String, deviation: f64 },
    #[error("expected a {expected} scenario, got {got}")]
    WrongKind {
        expected: &'static str,
        got: ScenarioKind,
    },
    #[error("scenario has no context {0}")]
    MissingContext(String),
    #[error("wing {0} has no supermeasurement option")]
    NoSupermeasurement(usize),
    #[error("parity {0} is not ±1")]
    NotDeterministic(f64),
    #[error("no usable samples")]
    EmptySample,
    #[error("sample {0} has a Null or multi-valued outcome")]
    NullOutcome(usize),
    #[error("event `{0}` is not in the batch layout")]
    UnknownKey(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Born rule on the fully dilated labs, reading memories for Ask wings and
/// supermeasuring the others.
pub fn dilated_context_distribution(
    s: &Scenario,
    context: &Context,
) -> Result<JointDistribution, PredictError> {
    let parts: Vec<ProjectiveMeasurement> = s
        .wings()
        .iter()
        .zip(&context.options)
        .map(|(w, &o)| match o {
            MenuOption::Ask => w.dilation.readout(&w.friend_var),
            MenuOption::Super(angle) => w.dilation.supermeasurement(angle, &w.super_var),
        })
        .collect();
    let m = ProjectiveMeasurement::product(&parts)?;
    Ok(born_distribution(&s.dilated_state(), &m)?)
}

/// Born rule on the undisturbed systems with one effective observable per wing.
pub fn effective_context_distribution(
    s: &Scenario,
    context: &Context,
) -> Result<JointDistribution, PredictError> {
    let parts = s
        .wings()
        .iter()
        .zip(&context.options)
        .map(|(w, &o)| {
            Ok(match o {
                MenuOption::Ask => w.dilation.direct(&w.friend_var),
                MenuOption::Super(angle) => ProjectiveMeasurement::observable(
                    &w.dilation.system,
                    &w.super_var,
                    effective_wing_observable(&w.dilation, angle)?,
                ),
            })
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let m = ProjectiveMeasurement::product(&parts)?;
    Ok(born_distribution(s.initial_state(), &m)?)
}

/// Distribution over the outcomes the final observer accesses in
/// `context`. Both computation paths are evaluated and must agree.
pub fn context_distribution(s: &Scenario, context: &Context) -> Result<JointDistribution, PredictError> {
    let dilated = dilated_context_distribution(s, context)?;
    let effective = effective_context_distribution(s, context)?;
    let deviation = dilated.max_abs_diff(&effective)?;
    if deviation > tolerance::COMPOSED {
        return Err(PredictError::PathMismatch {
            context: context.label(),
            deviation,
        });
    }
    Ok(dilated)
}

/// Joint Born distribution of every friend's own measurement on the
/// initial state, in wing order.
pub fn friend_joint_distribution(s: &Scenario) -> Result<JointDistribution, PredictError> {
    let parts: Vec<ProjectiveMeasurement> = s
        .wings()
        .iter()
        .map(|w| w.dilation.direct(&w.friend_var))
        .collect();
    Ok(born_distribution(
        s.initial_state(),
        &ProjectiveMeasurement::product(&parts)?,
    )?)
}

/// Evolves unitarily up to the named slice (every friend measurement on
/// or before the slice is applied as a dilation) and applies the Born rule
/// jointly to the slice's events.
pub fn fiqt_slice_distribution(s: &Scenario, slice: &str) -> Result<JointDistribution, PredictError> {
    let slice = s.slice(slice)?;
    let mut dilate: Vec<usize> = Vec::new();
    for &e in &slice.events {
        let mut before = s.graph().ancestors(e);
        before.insert(e);
        for ev in before {
            if let Event::FriendMeasurement(w) = ev {
                if !dilate.contains(&w) {
                    dilate.push(w);
                }
            }
        }
    }
    dilate.sort_unstable();
    let mut state = s.lab_state();
    for &w in &dilate {
        state = apply_dilation(&state, &s.wings()[w].dilation)?;
    }
    let parts = slice
        .events
        .iter()
        .map(|&e| match e {
            Event::FriendMeasurement(w) => {
                let wing = &s.wings()[w];
                Ok(wing.dilation.readout(&wing.friend_var))
            }
            Event::SuperMeasurement(w) => {
                let wing = &s.wings()[w];
                let angle = wing.menu.super_angle().ok_or(PredictError::NoSupermeasurement(w))?;
                Ok(wing.dilation.supermeasurement(angle, &wing.super_var))
            }
            other => Err(ScenarioError::UnknownEvent(other).into()),
        })
        .collect::<Result<Vec<_>, PredictError>>()?;
    Ok(born_distribution(&state, &ProjectiveMeasurement::product(&parts)?)?)
}

/// Pairwise correlators of `A, B, C, D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub ab: f64,
    pub ad: f64,
    pub cb: f64,
    pub cd: f64,
}

impl CorrelatorSet {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ab, self.ad, self.cb, self.cd]
    }

    pub fn from_array(e: [f64; 4]) -> Self {
        Self {
            ab: e[0],
            ad: e[1],
            cb: e[2],
            cd: e[3],
        }
    }

    pub fn from_tables(tables: &[JointDistribution; 4]) -> Result<Self, PredictError> {
        let pairs = [["A", "B"], ["A", "D"], ["C", "B"], ["C", "D"]];
        let mut e = [0.0; 4];
        for (k, (t, p)) in tables.iter().zip(pairs).enumerate() {
            e[k] = t.correlator(&p)?;
        }
        Ok(Self::from_array(e))
    }
}

/// Largest `|±E(A,B) ± E(A,D) ± E(C,B) ± E(C,D)|` over the sign patterns
/// with an odd number of minus signs.
pub fn chsh_value(c: &CorrelatorSet) -> f64 {
    let e = c.as_array();
    (0u8..16)
        .filter(|m| m.count_ones() % 2 == 1)
        .map(|m| {
            e.iter()
                .enumerate()
                .map(|(k, x)| if m >> k & 1 == 1 { -x } else { *x })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// The `AB, AD, CB, CD` tables of a Bong scenario (from its four contexts)
/// or an Ormrod–Barrett scenario (from its slices).
pub fn pair_tables(s: &Scenario) -> Result<[JointDistribution; 4], PredictError> {
    use OptionKind::{Ask, Super};
    let pairs = [["A", "B"], ["A", "D"], ["C", "B"], ["C", "D"]];
    let raw: Vec<JointDistribution> = match s.kind() {
        ScenarioKind::Bong => [[Super, Super], [Super, Ask], [Ask, Super], [Ask, Ask]]
            .iter()
            .map(|kinds| {
                let ctx = s
                    .context_by_kinds(kinds)
                    .ok_or_else(|| PredictError::MissingContext(format!("{kinds:?}")))?;
                context_distribution(s, ctx)
            })
            .collect::<Result<_, _>>()?,
        ScenarioKind::OrmrodBarrett => ["Alice+Bob", "Alice+Divya", "Bob+Chidi", "Chidi+Divya"]
            .iter()
            .map(|name| fiqt_slice_distribution(s, name))
            .collect::<Result<_, _>>()?,
        other => {
            return Err(PredictError::WrongKind {
                expected: "bong or ormrod-barrett",
                got: other,
            })
        }
    };
    let tables = raw
        .iter()
        .zip(pairs)
        .map(|(t, p)| t.marginal(&p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tables.try_into().expect("four pairs"))
}

pub fn correlators(s: &Scenario) -> Result<CorrelatorSet, PredictError> {
    CorrelatorSet::from_tables(&pair_tables(s)?)
}

/// The four trios, in the order reported by [`mermin_parities`].
pub const MERMIN_TRIOS: [[OptionKind; 3]; 4] = {
    use OptionKind::{Ask, Super};
    [
        [Super, Super, Super],
        [Super, Ask, Ask],
        [Ask, Super, Ask],
        [Ask, Ask, Super],
    ]
};

/// Expectations of `B1B2B3, B1A2A3, A1B2A3, A1A2B3`, each required to be
/// `±1` within the composed tolerance.
pub fn mermin_parities(s: &Scenario) -> Result<[f64; 4], PredictError> {
    if s.kind() != ScenarioKind::Lawrence {
        return Err(PredictError::WrongKind {
            expected: "lawrence",
            got: s.kind(),
        });
    }
    let mut out = [0.0; 4];
    for (k, kinds) in MERMIN_TRIOS.iter().enumerate() {
        let ctx = s
            .context_by_kinds(kinds)
            .ok_or_else(|| PredictError::MissingContext(format!("{kinds:?}")))?;
        let dist = context_distribution(s, ctx)?;
        let vars: Vec<&str> = dist.variables().iter().map(String::as_str).collect();
        let e = dist.correlator(&vars)?;
        if (e.abs() - 1.0).abs() > tolerance::COMPOSED {
            return Err(PredictError::NotDeterministic(e));
        }
        out[k] = e;
    }
    Ok(out)
}

/// `1 −` the fraction of runs in which the asker's value equals the
/// friend's own record.
pub fn non_absoluteness_coefficient(
    batch: &RunBatch,
    friend: &EventKey,
    asker: &EventKey,
) -> Result<f64, PredictError> {
    let f = batch
        .layout
        .index_of(friend)
        .ok_or_else(|| PredictError::UnknownKey(friend.to_string()))?;
    let a = batch
        .layout
        .index_of(asker)
        .ok_or_else(|| PredictError::UnknownKey(asker.to_string()))?;
    if batch.records.is_empty() {
        return Err(PredictError::EmptySample);
    }
    let mut agree = 0usize;
    for (i, r) in batch.records.iter().enumerate() {
        match (r.get(f), r.get(a)) {
            (Some(x), Some(y)) if x != Outcome::Null && y != Outcome::Null => {
                agree += usize::from(x == y);
            }
            _ => return Err(PredictError::NullOutcome(i)),
        }
    }
    Ok(1.0 - agree as f64 / batch.records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::PureState;
    use crate::scenario::{build_bong, build_ormrod_barrett};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn chsh_examples() {
        assert_eq!(chsh_value(&CorrelatorSet::from_array([0.0; 4])), 0.0);
        assert_eq!(chsh_value(&CorrelatorSet::from_array([1.0, 1.0, 1.0, 1.0])), 2.0);
        let h = SQRT_2 / 2.0;
        let v = chsh_value(&CorrelatorSet::from_array([h, h, h, -h]));
        assert!((v - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bong_default_correlators() {
        let s = build_bong(&PureState::singlet("x", "y"), 0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4)
            .unwrap();
        let c = correlators(&s).unwrap();
        assert!((c.cd + SQRT_2 / 2.0).abs() < 1e-12);
        assert!((c.ab + SQRT_2 / 2.0).abs() < 1e-12);
        assert!((chsh_value(&c) - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn slice_matches_super_super_context() {
        let s = build_ormrod_barrett(&PureState::singlet("x", "y"), 0.3, 1.0, 2.0, -0.4).unwrap();
        let slice = fiqt_slice_distribution(&s, "Alice+Bob").unwrap();
        let ctx = context_distribution(&s, &s.contexts()[0]).unwrap();
        assert!(slice.max_abs_diff(&ctx).unwrap() < 1e-12);
    }
}
