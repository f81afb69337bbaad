//! Extensions of quantum mechanics: rules that assign outcomes to every
//! observer in every run.

mod collapse;
mod controls;
mod kent;
mod naive;
mod rqm;

pub use collapse::CollapseAtFriend;
pub use controls::{AnswerTampering, LeakySetting, Tamper, TwoValued};
pub use kent::KentFinalMeasurement;
pub use naive::{NaiveAbsolute, NaiveStrategy};
pub use rqm::{RqmCpl, RqmNoCpl};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{cell_label, DistributionError};
use crate::feasibility::FeasibilityError;
use crate::predict::PredictError;
use crate::quantum::{PureState, QuantumError};
use crate::record::{Outcome, OutcomeRecord, RecordLayout, RunBatch};
use crate::scenario::{Context, Event, Scenario};
use crate::JointDistribution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}`: {message}")]
    Parameter { model: String, message: String },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub has_analytic: bool,
    pub emits_null: bool,
}

/// State a model ascribes to a friend's lab relative to its superobserver.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicalState {
    /// Unitary evolution only: the full dilated state.
    Unitary(PureState),
    /// The lab has collapsed onto the friend's record.
    CollapsedOnRecord,
    /// No quantum state is involved.
    Classical,
}

/// Exact distribution over full records of one context.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDistribution {
    pub layout: RecordLayout,
    /// Distinct records with positive probability, sorted.
    pub support: Vec<(Vec<Outcome>, f64)>,
}

impl RecordDistribution {
    pub fn from_map(layout: RecordLayout, map: BTreeMap<Vec<Outcome>, f64>) -> Self {
        Self {
            layout,
            support: map.into_iter().filter(|(_, p)| *p > 0.0).collect(),
        }
    }

    /// Marginal over `slots`, Null kept as its own value.
    pub fn marginal(&self, slots: &[usize]) -> BTreeMap<Vec<Outcome>, f64> {
        let mut out = BTreeMap::new();
        for (rec, p) in &self.support {
            let key: Vec<Outcome> = slots.iter().map(|&s| rec[s]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        out
    }

    /// `±1` table over `slots` named `names`; `None` if Null has positive
    /// probability on any slot.
    pub fn sign_table(&self, slots: &[usize], names: &[&str]) -> Option<JointDistribution> {
        let m = self.marginal(slots);
        if m.keys().any(|k| k.contains(&Outcome::Null)) {
            return None;
        }
        Some(JointDistribution::from_fn(names, |label| {
            let key: Vec<Outcome> = label.iter().map(|&v| Outcome::from_sign(v)).collect();
            m.get(&key).copied().unwrap_or(0.0)
        }))
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let probs: Vec<f64> = self.support.iter().map(|(_, p)| *p).collect();
        OutcomeRecord::from_outcomes(self.support[sample_index(&probs, rng)].0.iter().copied())
    }
}

/// A rule assigning outcomes to observers, bound to one scenario.
pub trait ExtensionModel: Send + Sync {
    fn name(&self) -> &str;

    fn scenario(&self) -> &Scenario;

    fn capabilities(&self) -> Capabilities;

    /// Exact record distribution, when the model provides one.
    fn analytic(&self, context: &Context) -> Option<RecordDistribution>;

    /// Draws one record for `context`.
    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord;

    /// State of `wing`'s lab relative to its superobserver in `context`.
    fn dynamical_state(&self, context: &Context, wing: usize) -> DynamicalState;

    /// `(outcome event, choice event)` pairs where the model lets the
    /// outcome depend on the choice.
    fn context_dependencies(&self) -> Vec<(Event, Event)>;

    fn layout(&self, context: &Context) -> RecordLayout {
        RecordLayout::for_context(self.scenario(), context)
    }
}

/// Quantum predictions a model draws on, computed once per scenario.
#[derive(Debug, Clone)]
pub(crate) struct QuantumTables {
    /// `context_distribution` per context index.
    pub contexts: Vec<JointDistribution>,
    /// Born joint of all friend measurements on the initial state.
    pub friend_joint: JointDistribution,
    /// Single-wing marginals of `friend_joint`.
    pub friend_marginals: Vec<JointDistribution>,
}

impl QuantumTables {
    pub fn new(s: &Scenario) -> Result<Self, ModelError> {
        let contexts = s
            .contexts()
            .iter()
            .map(|c| crate::predict::context_distribution(s, c))
            .collect::<Result<_, _>>()?;
        let friend_joint = crate::predict::friend_joint_distribution(s)?;
        let friend_marginals = s
            .wings()
            .iter()
            .map(|w| friend_joint.marginal(&[w.friend_var.as_str()]))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            contexts,
            friend_joint,
            friend_marginals,
        })
    }
}

/// Index drawn with the given weights. Weights need not sum exactly to one.
pub fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws a `±1` tuple from a table.
pub fn sample_table(t: &JointDistribution, rng: &mut ChaCha8Rng) -> Vec<i8> {
    cell_label(sample_index(t.probabilities(), rng), t.variables().len())
}

/// Generator for run `index` of a batch: seeded by `(seed, context)`, one
/// stream per run.
pub fn run_rng(seed: u64, context: usize, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(context as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// `n` independent records. Runs are generated in parallel; each depends
/// only on `(seed, context, index)`.
pub fn sample_runs(
    model: &dyn ExtensionModel,
    context: &Context,
    n: usize,
    seed: u64,
) -> Result<RunBatch, ModelError> {
    if n == 0 {
        return Err(ModelError::NoSamples);
    }
    let records: Vec<OutcomeRecord> = (0..n as u64)
        .into_par_iter()
        .map(|i| model.sample(context, &mut run_rng(seed, context.index, i)))
        .collect();
    Ok(RunBatch {
        model: model.name().to_string(),
        scenario: model.scenario().kind().id().to_string(),
        context: context.clone(),
        seed,
        layout: model.layout(context),
        records,
    })
}

/// Model selection as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

pub const MODEL_NAMES: [&str; 5] = [
    "collapse-at-friend",
    "rqm-cpl",
    "kent",
    "naive-absolute",
    "rqm-no-cpl",
];

impl ModelSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn build(&self, s: &Scenario) -> Result<Box<dyn ExtensionModel>, ModelError> {
        let no_params = || -> Result<(), ModelError> {
            match self.params.keys().next() {
                Some(k) => Err(ModelError::Parameter {
                    model: self.name.clone(),
                    message: format!("unknown parameter `{k}`"),
                }),
                None => Ok(()),
            }
        };
        Ok(match self.name.as_str() {
            "collapse-at-friend" => {
                no_params()?;
                Box::new(CollapseAtFriend::new(s)?)
            }
            "rqm-cpl" => {
                no_params()?;
                Box::new(RqmCpl::new(s)?)
            }
            "kent" => {
                no_params()?;
                Box::new(KentFinalMeasurement::new(s)?)
            }
            "rqm-no-cpl" => {
                no_params()?;
                Box::new(RqmNoCpl::new(s)?)
            }
            "naive-absolute" => {
                let strategy = NaiveStrategy::from_params(&self.params)?;
                Box::new(NaiveAbsolute::new(s, strategy)?)
            }
            other => return Err(ModelError::UnknownModel(other.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_index_respects_zero_weights() {
        let mut rng = run_rng(1, 0, 0);
        for _ in 0..100 {
            assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }

    #[test]
    fn run_streams_differ() {
        let a: u64 = run_rng(7, 0, 0).random();
        let b: u64 = run_rng(7, 0, 1).random();
        let c: u64 = run_rng(7, 1, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, run_rng(7, 0, 0).random::<u64>());
    }
}
