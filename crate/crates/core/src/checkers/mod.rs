//! Executable verdicts for the assumptions behind the no-go theorems, and
//! detection of the three kinds of disagreement between observers.
//!
//! Every flag is evaluated on every available path: exactly from a model's
//! analytic distributions, statistically from sampled batches, or
//! structurally from records and the dependency graph. The reported verdict
//! is the most severe one across paths.

mod disaccord;
mod flags;
mod theorem;

pub use disaccord::{detect_disaccord, DisaccordReport, DisaccordType, DisaccordWitness, FiqtReadings};
pub use flags::{
    check_aoe1, check_aoe2_tracking, check_first_person_universality, check_locality,
    check_no_superdeterminism, check_paradox_freedom, observer_view,
};
pub use theorem::{theorem_report, upholds_everything, TheoremEvidence, TheoremReport, THEOREM_FLAGS};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::FeasibilityError;
use crate::models::{run_rng, sample_runs, ExtensionModel, ModelError, RecordDistribution};
use crate::predict::{context_distribution, PredictError};
use crate::quantum::QuantumError;
use crate::record::{Outcome, OutcomeRecord, RunBatch};
use crate::scenario::Context;
use crate::{stats, tolerance, JointDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("significance must lie in (0, 1), got {0}")]
    Significance(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NotApplicable,
    Satisfied,
    SatisfiedWithNulls,
    Violated,
}

impl Verdict {
    pub fn is_violated(self) -> bool {
        self == Verdict::Violated
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NotApplicable => "not-applicable",
            Verdict::Satisfied => "satisfied",
            Verdict::SatisfiedWithNulls => "satisfied-with-nulls",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Statistical,
    Structural,
}

/// A run that can be regenerated from `(seed, context, index)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunWitness {
    pub context: String,
    pub seed: u64,
    pub index: u64,
    /// The record as a JSON line.
    pub record: String,
}

impl RunWitness {
    pub fn new(batch: &RunBatch, index: usize) -> Self {
        Self {
            context: batch.context.label(),
            seed: batch.seed,
            index: index as u64,
            record: batch.records[index].to_json_line(&batch.layout),
        }
    }

    /// Whether `model` regenerates exactly this record.
    pub fn replays(&self, model: &dyn ExtensionModel) -> bool {
        let Some(ctx) = model.scenario().context_by_label(&self.context) else {
            return false;
        };
        let rec = model.sample(ctx, &mut run_rng(self.seed, ctx.index, self.index));
        rec.to_json_line(&model.layout(ctx)) == self.record
    }
}

/// Outcome of one evaluation path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub method: Method,
    pub verdict: Verdict,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Runs the path examined, summed over contexts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RunWitness>,
}

impl Evidence {
    pub fn new(method: Method, verdict: Verdict, summary: impl Into<String>) -> Self {
        Self {
            method,
            verdict,
            summary: summary.into(),
            context: None,
            statistic: None,
            threshold: None,
            samples: None,
            witness: None,
        }
    }

    fn context(mut self, c: Option<String>) -> Self {
        self.context = c;
        self
    }

    fn test(mut self, statistic: f64, threshold: f64) -> Self {
        self.statistic = Some(statistic);
        self.threshold = Some(threshold);
        self
    }

    fn samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    fn witness(mut self, w: Option<RunWitness>) -> Self {
        self.witness = w;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagResult {
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
}

impl FlagResult {
    pub fn from_paths(evidence: Vec<Evidence>) -> Self {
        let verdict = evidence
            .iter()
            .map(|e| e.verdict)
            .max()
            .unwrap_or(Verdict::NotApplicable);
        Self { verdict, evidence }
    }

    pub fn not_applicable(reason: &str) -> Self {
        Self::from_paths(vec![Evidence::new(Method::Structural, Verdict::NotApplicable, reason)])
    }

    /// Whether every path reached the same verdict.
    pub fn paths_agree(&self) -> bool {
        self.evidence.iter().all(|e| e.verdict == self.verdict)
    }

    pub fn path(&self, method: Method) -> Option<&Evidence> {
        self.evidence.iter().find(|e| e.method == method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckSettings {
    pub samples: usize,
    pub seed: u64,
    /// Family-wise level of each statistical verdict.
    pub significance: f64,
    /// Largest per-cell difference accepted as equality on analytic paths.
    pub analytic_tolerance: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 1,
            significance: stats::SIGNIFICANCE,
            analytic_tolerance: tolerance::COMPOSED,
        }
    }
}

/// A model together with everything the checkers read from it: one sampled
/// batch and (when available) the analytic distribution per context, and the
/// unitary predictions it is compared against.
pub struct Evaluation<'a> {
    pub model: &'a dyn ExtensionModel,
    pub settings: CheckSettings,
    pub batches: Vec<RunBatch>,
    pub analytic: Vec<Option<RecordDistribution>>,
    pub quantum: Vec<JointDistribution>,
}

impl<'a> Evaluation<'a> {
    pub fn new(model: &'a dyn ExtensionModel, settings: CheckSettings) -> Result<Self, CheckError> {
        if settings.samples == 0 {
            return Err(CheckError::NoSamples);
        }
        if !(settings.significance > 0.0 && settings.significance < 1.0) {
            return Err(CheckError::Significance(settings.significance));
        }
        let s = model.scenario();
        let batches = s
            .contexts()
            .iter()
            .map(|c| sample_runs(model, c, settings.samples, settings.seed))
            .collect::<Result<_, _>>()?;
        let analytic = s.contexts().iter().map(|c| model.analytic(c)).collect();
        let quantum = s
            .contexts()
            .iter()
            .map(|c| context_distribution(s, c))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            model,
            settings,
            batches,
            analytic,
            quantum,
        })
    }

    pub fn contexts(&self) -> &[Context] {
        self.model.scenario().contexts()
    }

    /// Analytic distributions for every context, if the model has them.
    pub fn all_analytic(&self) -> Option<Vec<&RecordDistribution>> {
        self.analytic.iter().map(Option::as_ref).collect()
    }
}

/// First value in each slot; records with several values are judged by
/// the one-outcome check, not here.
pub(crate) fn project(rec: &OutcomeRecord, slots: &[usize]) -> Vec<Outcome> {
    slots.iter().map(|&s| rec.values(s)[0]).collect()
}

pub(crate) fn first_record_with(
    batch: &RunBatch,
    slots: &[usize],
    pred: impl Fn(&[Outcome]) -> bool,
) -> Option<usize> {
    batch.records.iter().position(|r| pred(&project(r, slots)))
}

pub(crate) fn empirical(batch: &RunBatch, slots: &[usize]) -> BTreeMap<Vec<Outcome>, u64> {
    let mut out = BTreeMap::new();
    for r in &batch.records {
        *out.entry(project(r, slots)).or_insert(0) += 1;
    }
    out
}

/// Largest per-key difference between two distributions over the same
/// kind of tuple; missing keys count as zero.
pub(crate) fn max_gap(a: &BTreeMap<Vec<Outcome>, f64>, b: &BTreeMap<Vec<Outcome>, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn total_variation(a: &BTreeMap<Vec<Outcome>, f64>, b: &BTreeMap<Vec<Outcome>, f64>) -> f64 {
    let mut keys: Vec<&Vec<Outcome>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|k| (a.get(*k).copied().unwrap_or(0.0) - b.get(*k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

/// Flag names in report order.
pub const FLAG_NAMES: [&str; 6] = [
    "aoe1",
    "aoe2",
    "first-person-universality",
    "locality",
    "no-superdeterminism",
    "paradox-freedom",
];

/// Every flag and the disaccord set of one model on its scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagReport {
    pub model: String,
    pub scenario: String,
    pub samples: usize,
    pub seed: u64,
    pub flags: BTreeMap<String, FlagResult>,
    pub disaccord: DisaccordReport,
}

impl FlagReport {
    pub fn verdict(&self, flag: &str) -> Option<Verdict> {
        self.flags.get(flag).map(|f| f.verdict)
    }

    /// Whether analytic, statistical and structural paths agree on every flag.
    pub fn paths_agree(&self) -> bool {
        self.flags.values().all(FlagResult::paths_agree)
    }
}

pub fn flag_report(model: &dyn ExtensionModel, settings: CheckSettings) -> Result<FlagReport, CheckError> {
    let ev = Evaluation::new(model, settings)?;
    report_from(&ev)
}

pub fn report_from(ev: &Evaluation<'_>) -> Result<FlagReport, CheckError> {
    let aoe2 = check_aoe2_tracking(ev);
    let mut flags = BTreeMap::new();
    flags.insert("aoe1".to_string(), check_aoe1(ev));
    flags.insert(
        "first-person-universality".to_string(),
        check_first_person_universality(ev)?,
    );
    flags.insert("locality".to_string(), check_locality(ev));
    flags.insert("no-superdeterminism".to_string(), check_no_superdeterminism(ev));
    flags.insert("paradox-freedom".to_string(), check_paradox_freedom(ev.model));
    let disaccord = detect_disaccord(ev, &aoe2)?;
    flags.insert("aoe2".to_string(), aoe2);
    Ok(FlagReport {
        model: ev.model.name().to_string(),
        scenario: ev.model.scenario().kind().id().to_string(),
        samples: ev.settings.samples,
        seed: ev.settings.seed,
        flags,
        disaccord,
    })
}
