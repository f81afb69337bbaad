use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{first_record_with, CheckError, Evaluation, FlagResult, Method, RunWitness, Verdict};
use crate::models::DynamicalState;
use crate::predict::fiqt_slice_distribution;
use crate::quantum::born_distribution;
use crate::record::Outcome;
use crate::scenario::{Event, MenuOption};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DisaccordType {
    /// An inference about a distant friend's record, drawn on a spacelike
    /// slice, disagrees with the record the friend holds.
    I,
    /// The state a superobserver assigns to a friend's lab does not match
    /// the friend's own record (or lack of one).
    II,
    /// What a superobserver hears on asking differs from the friend's record.
    III,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisaccordWitness {
    pub kind: DisaccordType,
    pub context: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunWitness>,
}

/// The slice-inference check read two ways: by the records the model
/// produces, and by whether the events the inference reasons about occur
/// at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiqtReadings {
    /// A produced record falls in a cell the slice inference rules out.
    pub forbidden_record_produced: bool,
    /// Some event the slice inference assigns a value to has no outcome.
    pub inferred_event_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisaccordReport {
    pub types: BTreeSet<DisaccordType>,
    pub witnesses: Vec<DisaccordWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiqt: Option<FiqtReadings>,
}

/// All three disaccord types for the evaluated model. `aoe2` is the
/// tracking verdict already computed for the same evaluation.
pub fn detect_disaccord(ev: &Evaluation<'_>, aoe2: &FlagResult) -> Result<DisaccordReport, CheckError> {
    let mut witnesses = Vec::new();
    type_iii(aoe2, &mut witnesses);
    type_ii(ev, &mut witnesses)?;
    let fiqt = type_i(ev, &mut witnesses)?;
    Ok(DisaccordReport {
        types: witnesses.iter().map(|w| w.kind).collect(),
        witnesses,
        fiqt,
    })
}

fn type_iii(aoe2: &FlagResult, out: &mut Vec<DisaccordWitness>) {
    if aoe2.verdict != Verdict::Violated {
        return;
    }
    let e = aoe2
        .path(Method::Structural)
        .filter(|e| e.verdict == Verdict::Violated)
        .or_else(|| aoe2.evidence.iter().find(|e| e.verdict == Verdict::Violated))
        .expect("a violated flag has violated evidence");
    out.push(DisaccordWitness {
        kind: DisaccordType::III,
        context: e
            .witness
            .as_ref()
            .map(|w| w.context.clone())
            .or_else(|| e.context.clone())
            .unwrap_or_default(),
        detail: "asked superobserver hears a value other than the friend's record".into(),
        run: e.witness.clone(),
    });
}

/// Probability mass of friend slot `w` that is definite, and that is Null.
fn record_mass(ev: &Evaluation<'_>, ctx: usize, w: usize) -> (f64, f64) {
    match &ev.analytic[ctx] {
        Some(d) => {
            let m = d.marginal(&[w]);
            let null = m.get(&vec![Outcome::Null]).copied().unwrap_or(0.0);
            (m.values().sum::<f64>() - null, null)
        }
        None => {
            let b = &ev.batches[ctx];
            let nulls = b
                .records
                .iter()
                .filter(|r| r.values(w)[0] == Outcome::Null)
                .count() as f64;
            let n = b.count() as f64;
            ((n - nulls) / n, nulls / n)
        }
    }
}

fn type_ii(ev: &Evaluation<'_>, out: &mut Vec<DisaccordWitness>) -> Result<(), CheckError> {
    let s = ev.model.scenario();
    for ctx in s.contexts() {
        for (w, wing) in s.wings().iter().enumerate() {
            if !matches!(ctx.options[w], MenuOption::Super(_)) {
                continue;
            }
            let DynamicalState::Unitary(state) = ev.model.dynamical_state(ctx, w) else {
                continue;
            };
            let p = born_distribution(&state, &wing.dilation.readout(&wing.friend_var))?.prob(&[1]);
            if p <= tolerance::COMPOSED || p >= 1.0 - tolerance::COMPOSED {
                continue;
            }
            let (definite, null) = record_mass(ev, ctx.index, w);
            let batch = &ev.batches[ctx.index];
            let (detail, run) = if definite > 0.0 {
                (
                    format!(
                        "{} holds a definite record while the lab state relative to {} is not an eigenstate of it (P(+) = {p:.6})",
                        wing.friend, wing.superobserver
                    ),
                    first_record_with(batch, &[w], |v| v[0] != Outcome::Null),
                )
            } else if null > 0.0 {
                (
                    format!(
                        "{} has no outcome while the lab relative to {} evolves unitarily (P(+) = {p:.6})",
                        wing.friend, wing.superobserver
                    ),
                    first_record_with(batch, &[w], |v| v[0] == Outcome::Null),
                )
            } else {
                continue;
            };
            out.push(DisaccordWitness {
                kind: DisaccordType::II,
                context: ctx.label(),
                detail,
                run: run.map(|i| RunWitness::new(batch, i)),
            });
        }
    }
    Ok(())
}

fn type_i(ev: &Evaluation<'_>, out: &mut Vec<DisaccordWitness>) -> Result<Option<FiqtReadings>, CheckError> {
    let s = ev.model.scenario();
    if s.slices().is_empty() {
        return Ok(None);
    }
    let n = s.wings().len();
    let mut readings = FiqtReadings {
        forbidden_record_produced: false,
        inferred_event_missing: false,
    };
    for slice in s.slices() {
        let predicted = fiqt_slice_distribution(s, &slice.name)?;
        let forbidden = |v: &[Outcome]| -> bool {
            let signs: Option<Vec<i8>> = v.iter().map(|o| o.sign()).collect();
            signs.is_some_and(|x| predicted.prob(&x) <= tolerance::ZERO_SUPPORT)
        };
        for ctx in s.contexts() {
            let slots: Option<Vec<usize>> = slice
                .events
                .iter()
                .map(|&e| match e {
                    Event::FriendMeasurement(w) => Some(w),
                    Event::SuperMeasurement(w) => {
                        matches!(ctx.options[w], MenuOption::Super(_)).then_some(n + w)
                    }
                    _ => None,
                })
                .collect();
            let Some(slots) = slots else {
                continue;
            };
            let batch = &ev.batches[ctx.index];
            let (mass, missing) = match &ev.analytic[ctx.index] {
                Some(d) => {
                    let m = d.marginal(&slots);
                    let mass: f64 = m.iter().filter(|(k, _)| forbidden(k)).map(|(_, p)| p).sum();
                    (mass, m.keys().any(|k| k.contains(&Outcome::Null)))
                }
                None => (
                    0.0,
                    first_record_with(batch, &slots, |v| v.contains(&Outcome::Null)).is_some(),
                ),
            };
            readings.inferred_event_missing |= missing;
            let run = first_record_with(batch, &slots, forbidden);
            if mass > tolerance::ZERO_SUPPORT || run.is_some() {
                readings.forbidden_record_produced = true;
                out.push(DisaccordWitness {
                    kind: DisaccordType::I,
                    context: ctx.label(),
                    detail: format!(
                        "inference on slice {} gives probability 0 to records the model produces (mass {mass:.6})",
                        slice.name
                    ),
                    run: run.map(|i| RunWitness::new(batch, i)),
                });
            }
        }
    }
    Ok(Some(readings))
}
