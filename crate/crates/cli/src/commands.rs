use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use friendlab_core::checkers::{theorem_report, DisaccordType, FlagReport, TheoremReport};
use friendlab_core::feasibility::{
    joint_feasibility_lp, parity_assignment_search, possibilistic_contradiction, FeasibilityError,
    LpVerdict, PairTargets, Sign, SupportTable, PARITY_VARIABLES,
};
use friendlab_core::models::{sample_runs, ExtensionModel};
use friendlab_core::predict::{
    chsh_value, context_distribution, correlators, fiqt_slice_distribution, friend_joint_distribution,
    mermin_parities, pair_tables,
};
use friendlab_core::record::{Outcome, RunBatch};
use friendlab_core::scenario::{Scenario, ScenarioKind};
use friendlab_core::{tolerance, JointDistribution};
use sha2::{Digest, Sha256};

use crate::config::{BaselineEntry, RunConfig};
use crate::report::{
    BatchSummary, Feasibility, Mismatch, NamedDistribution, ParitySearch, Predictions, Report,
    Simulation, Verification,
};
use crate::{io_error, CliError, EXIT_MISMATCH, EXIT_OK};

/// A finished command: its report, and the lines of a baseline diff (empty
/// unless `verify` found mismatches).
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: Report,
    pub diff: Vec<String>,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        if self.diff.is_empty() {
            EXIT_OK
        } else {
            EXIT_MISMATCH
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(phase.into(), start.elapsed().as_secs_f64());
        out
    }
}

fn scenario(config: &RunConfig) -> Result<Scenario, CliError> {
    config.scenario.build().map_err(input)
}

fn models(config: &RunConfig, s: &Scenario) -> Result<Vec<Box<dyn ExtensionModel>>, CliError> {
    config
        .model_specs()
        .iter()
        .map(|m| m.build(s).map_err(input))
        .collect()
}

pub fn predictions(s: &Scenario) -> Result<Predictions, CliError> {
    let contexts = s
        .contexts()
        .iter()
        .map(|c| {
            Ok(NamedDistribution {
                name: c.label(),
                distribution: context_distribution(s, c).map_err(input)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let slices = s
        .slices()
        .iter()
        .map(|sl| {
            Ok(NamedDistribution {
                name: sl.name.clone(),
                distribution: fiqt_slice_distribution(s, &sl.name).map_err(input)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (correlators, chsh) = match s.kind() {
        ScenarioKind::Bong | ScenarioKind::OrmrodBarrett => {
            let c = correlators(s).map_err(input)?;
            (Some(c), Some(chsh_value(&c)))
        }
        _ => (None, None),
    };
    let parities = match s.kind() {
        ScenarioKind::Lawrence => Some(mermin_parities(s).map_err(input)?),
        _ => None,
    };
    Ok(Predictions {
        scenario: s.kind().id().into(),
        contexts,
        friend_joint: friend_joint_distribution(s).map_err(input)?,
        slices,
        correlators,
        chsh,
        parities,
    })
}

pub fn cmd_predict(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut timer = Timer(BTreeMap::new());
    let s = timer.time("build", || scenario(config))?;
    let p = timer.time("predict", || predictions(&s))?;
    let mut report = Report::new("predict", config);
    report.sections.predictions = Some(p);
    report.timings = timer.0;
    Ok(CommandOutput { report, diff: Vec::new() })
}

fn targets(config: &RunConfig, s: &Scenario) -> Result<Vec<JointDistribution>, CliError> {
    if config.targets.is_empty() {
        return Ok(pair_tables(s).map_err(input)?.to_vec());
    }
    config
        .targets
        .iter()
        .map(|t| JointDistribution::new(t.variables.clone(), t.probabilities.clone()).map_err(input))
        .collect()
}

fn feasibility(config: &RunConfig, s: &Scenario) -> Result<Feasibility, CliError> {
    let feasibility_error = |e: FeasibilityError| CliError::Input(e.to_string());
    match s.kind() {
        ScenarioKind::Bong | ScenarioKind::OrmrodBarrett => {
            let tables = targets(config, s)?;
            let lp = joint_feasibility_lp(&PairTargets::from_tables(&tables).map_err(feasibility_error)?)
                .map_err(feasibility_error)?;
            let possibilistic = if s.kind() == ScenarioKind::OrmrodBarrett && config.targets.is_empty() {
                let [ab, ad, cb, cd] = pair_tables(s).map_err(input)?;
                let supports = SupportTable::from_distributions(&[cd, ad, cb]).map_err(feasibility_error)?;
                Some(possibilistic_contradiction(&supports, &ab).map_err(feasibility_error)?)
            } else {
                None
            };
            let contradiction = lp.verdict == LpVerdict::Infeasible
                || possibilistic.as_ref().is_some_and(|p| p.contradiction);
            Ok(Feasibility {
                contradiction,
                lp: Some(lp),
                parity: None,
                possibilistic,
            })
        }
        ScenarioKind::Lawrence => {
            if !config.targets.is_empty() {
                return Err(CliError::Usage("`targets` applies to bong and ormrod-barrett only".into()));
            }
            let parities = mermin_parities(s).map_err(input)?;
            let mut signs = [Sign::Plus; 4];
            for (k, &p) in parities.iter().enumerate() {
                signs[k] = Sign::from_parity(p, tolerance::COMPOSED).map_err(feasibility_error)?;
            }
            let assignments = parity_assignment_search(signs);
            Ok(Feasibility {
                contradiction: assignments.is_empty(),
                lp: None,
                parity: Some(ParitySearch {
                    parities,
                    signs: signs.map(Sign::value),
                    variables: PARITY_VARIABLES.iter().map(|v| v.to_string()).collect(),
                    assignments,
                }),
                possibilistic: None,
            })
        }
        ScenarioKind::Wigner => {
            if !config.targets.is_empty() {
                return Err(CliError::Usage("`targets` applies to bong and ormrod-barrett only".into()));
            }
            Ok(Feasibility {
                contradiction: false,
                lp: None,
                parity: None,
                possibilistic: None,
            })
        }
    }
}

pub fn cmd_feasibility(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut timer = Timer(BTreeMap::new());
    let s = timer.time("build", || scenario(config))?;
    let f = timer.time("feasibility", || feasibility(config, &s))?;
    let mut report = Report::new("feasibility", config);
    report.sections.feasibility = Some(f);
    report.timings = timer.0;
    Ok(CommandOutput { report, diff: Vec::new() })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Largest per-cell gap between the batch's record frequencies and the
/// model's analytic record distribution.
fn analytic_delta(model: &dyn ExtensionModel, batch: &RunBatch) -> Option<f64> {
    let analytic = model.analytic(&batch.context)?;
    let slots: Vec<usize> = (0..batch.layout.len()).collect();
    let exact = analytic.marginal(&slots);
    let mut counts: BTreeMap<Vec<Outcome>, u64> = BTreeMap::new();
    for r in &batch.records {
        *counts.entry(slots.iter().map(|&s| r.values(s)[0]).collect()).or_insert(0) += 1;
    }
    let n = batch.count() as f64;
    let keys: BTreeSet<&Vec<Outcome>> = exact.keys().chain(counts.keys()).collect();
    Some(
        keys.into_iter()
            .map(|k| {
                let p = exact.get(k).copied().unwrap_or(0.0);
                let q = counts.get(k).copied().unwrap_or(0) as f64 / n;
                (p - q).abs()
            })
            .fold(0.0, f64::max),
    )
}

/// Largest `|E_empirical − E_unitary|` over nonempty subsets of the
/// context's observed variables; records with a Null in the subset are skipped.
fn fpu_delta(s: &Scenario, batch: &RunBatch) -> Result<f64, CliError> {
    let quantum = context_distribution(s, &batch.context).map_err(input)?;
    let n = s.wings().len();
    let vars: Vec<&str> = quantum.variables().iter().map(String::as_str).collect();
    let mut worst: f64 = 0.0;
    for mask in 1usize..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let names: Vec<&str> = subset.iter().map(|&k| vars[k]).collect();
        let exact = quantum.correlator(&names).map_err(input)?;
        let slots: Vec<usize> = subset.iter().map(|&k| batch.layout.super_slot(k)).collect();
        let (mut sum, mut used) = (0i64, 0u64);
        for r in &batch.records {
            if let Some(signs) = r.signs(&slots) {
                sum += signs.iter().map(|&v| i64::from(v)).product::<i64>();
                used += 1;
            }
        }
        if used > 0 {
            worst = worst.max((sum as f64 / used as f64 - exact).abs());
        }
    }
    Ok(worst)
}

fn null_fraction(batch: &RunBatch) -> BTreeMap<String, f64> {
    let n = batch.count() as f64;
    batch
        .layout
        .entries()
        .iter()
        .enumerate()
        .map(|(slot, e)| {
            let nulls = batch
                .records
                .iter()
                .filter(|r| r.values(slot).contains(&Outcome::Null))
                .count();
            (e.key.to_string(), nulls as f64 / n)
        })
        .collect()
}

/// Samples every configured model in every context, writing
/// `<dir>/<model>.<context>.jsonl`.
pub fn cmd_simulate(config: &RunConfig, dir: &Path) -> Result<CommandOutput, CliError> {
    let seed = config.seed()?;
    let mut timer = Timer(BTreeMap::new());
    let s = timer.time("build", || scenario(config))?;
    let models = models(config, &s)?;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let start = Instant::now();
    let mut batches = Vec::new();
    for m in &models {
        for ctx in s.contexts() {
            let batch = sample_runs(m.as_ref(), ctx, config.run.samples, seed).map_err(input)?;
            let text = batch.to_jsonl();
            let file = format!("{}.{}.jsonl", m.name(), ctx.label());
            let path = dir.join(&file);
            std::fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
            batches.push(BatchSummary {
                model: m.name().into(),
                context: ctx.label(),
                file,
                records: batch.count(),
                sha256: sha256_hex(text.as_bytes()),
                null_fraction: null_fraction(&batch),
                analytic_delta: analytic_delta(m.as_ref(), &batch),
                fpu_delta: fpu_delta(&s, &batch)?,
            });
        }
    }
    timer.0.insert("simulate".into(), start.elapsed().as_secs_f64());
    let mut report = Report::new("simulate", config);
    report.sections.simulation = Some(Simulation {
        scenario: s.kind().id().into(),
        batches,
    });
    report.timings = timer.0;
    Ok(CommandOutput { report, diff: Vec::new() })
}

fn disaccord_text(types: &BTreeSet<DisaccordType>) -> String {
    let names: Vec<String> = types.iter().map(|t| format!("{t:?}")).collect();
    format!("{{{}}}", names.join(", "))
}

/// Differences between one model's row and its baseline entry.
pub fn compare(row: &FlagReport, expected: &BaselineEntry) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for (flag, want) in expected.flags() {
        let got = row.verdict(flag);
        if got != Some(want) {
            out.push(Mismatch {
                model: row.model.clone(),
                item: flag.into(),
                expected: want.to_string(),
                actual: got.map_or("missing".into(), |v| v.to_string()),
            });
        }
    }
    if let Some(types) = &expected.disaccord {
        let want: BTreeSet<DisaccordType> = types.iter().copied().collect();
        if want != row.disaccord.types {
            out.push(Mismatch {
                model: row.model.clone(),
                item: "disaccord".into(),
                expected: disaccord_text(&want),
                actual: disaccord_text(&row.disaccord.types),
            });
        }
    }
    out
}

/// Runs every check for every configured model and compares the verdicts
/// with the baseline. A model without a baseline entry is an input error.
pub fn cmd_verify(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let settings = config.check_settings()?;
    let specs = config.model_specs();
    if let Some(m) = specs.iter().find(|m| !config.baseline.contains_key(&m.name)) {
        return Err(CliError::MissingBaseline(m.name.clone()));
    }
    let mut timer = Timer(BTreeMap::new());
    let s = timer.time("build", || scenario(config))?;
    let models = models(config, &s)?;
    let refs: Vec<&dyn ExtensionModel> = models.iter().map(|m| m.as_ref()).collect();
    let theorem: TheoremReport = timer.time("verify", || theorem_report(&s, &refs, settings).map_err(input))?;
    let mismatches: Vec<Mismatch> = theorem
        .rows
        .iter()
        .flat_map(|row| compare(row, &config.baseline[&row.model]))
        .collect();
    let diff = mismatches.iter().map(|m| format!("mismatch: {m}")).collect();
    let mut report = Report::new("verify", config);
    report.sections.verification = Some(Verification {
        matches_baseline: mismatches.is_empty(),
        paths_agree: theorem.rows.iter().all(FlagReport::paths_agree),
        mismatches,
        theorem,
    });
    report.timings = timer.0;
    Ok(CommandOutput { report, diff })
}
