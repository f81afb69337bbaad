use std::collections::{BTreeMap, BTreeSet};

use super::{
    empirical, max_gap, total_variation, CheckError, Evaluation, Evidence, FlagResult,
    Method, RunWitness, Verdict,
};
use crate::models::ExtensionModel;
use crate::record::{Outcome, RunBatch};
use crate::scenario::{Context, MenuOption, Scenario};
use crate::stats::{cell_bound, cell_sigma, chi_square_homogeneity};
use crate::JointDistribution;

fn sign_map(d: &JointDistribution) -> BTreeMap<Vec<Outcome>, f64> {
    d.cells()
        .map(|(label, p)| (label.into_iter().map(Outcome::from_sign).collect(), p))
        .collect()
}

fn frequencies(counts: &BTreeMap<Vec<Outcome>, u64>, n: usize) -> BTreeMap<Vec<Outcome>, f64> {
    counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n as f64)).collect()
}

/// One outcome per performed measurement per observer. Nulls are allowed
/// only for models that declare them, and are reported distinctly.
pub fn check_aoe1(ev: &Evaluation<'_>) -> FlagResult {
    let may_null = ev.model.capabilities().emits_null;
    let mut paths = Vec::new();
    if let Some(all) = ev.all_analytic() {
        let nulls = all
            .iter()
            .any(|d| d.support.iter().any(|(r, _)| r.contains(&Outcome::Null)));
        let verdict = match (nulls, may_null) {
            (false, _) => Verdict::Satisfied,
            (true, true) => Verdict::SatisfiedWithNulls,
            (true, false) => Verdict::Violated,
        };
        let summary = if nulls {
            "some events have no outcome (Null) with positive probability"
        } else {
            "every record assigns exactly one value per event"
        };
        paths.push(Evidence::new(Method::Analytic, verdict, summary));
    }
    let mut nulls = false;
    let mut multi: Option<(RunWitness, String)> = None;
    'outer: for b in &ev.batches {
        for (i, r) in b.records.iter().enumerate() {
            for slot in 0..r.len() {
                let vals = r.values(slot);
                if vals.len() != 1 {
                    multi = Some((RunWitness::new(b, i), b.layout.entries()[slot].key.to_string()));
                    break 'outer;
                }
                nulls |= vals[0] == Outcome::Null;
            }
        }
    }
    let total: usize = ev.batches.iter().map(RunBatch::count).sum();
    let e = match multi {
        Some((w, key)) => Evidence::new(
            Method::Structural,
            Verdict::Violated,
            format!("`{key}` holds more than one value"),
        )
        .context(Some(w.context.clone()))
        .witness(Some(w)),
        None if nulls && !may_null => {
            Evidence::new(Method::Structural, Verdict::Violated, "Null emitted by a model that does not declare Nulls")
        }
        None if nulls => Evidence::new(
            Method::Structural,
            Verdict::SatisfiedWithNulls,
            "one value per event; some events are Null",
        ),
        None => Evidence::new(Method::Structural, Verdict::Satisfied, "one value per event in every run"),
    };
    paths.push(e.samples(total));
    FlagResult::from_paths(paths)
}

/// `(friend slot, asker slot)` of every asking wing.
fn ask_pairs(ctx: &Context) -> Vec<(usize, usize)> {
    let n = ctx.options.len();
    (0..n)
        .filter(|&w| ctx.options[w] == MenuOption::Ask)
        .map(|w| (w, n + w))
        .collect()
}

/// An asked superobserver hears exactly the friend's record, on every run.
pub fn check_aoe2_tracking(ev: &Evaluation<'_>) -> FlagResult {
    if !ev.contexts().iter().any(|c| !ask_pairs(c).is_empty()) {
        return FlagResult::not_applicable("no context asks a friend");
    }
    let tol = ev.settings.analytic_tolerance;
    let mut paths = Vec::new();
    if let Some(all) = ev.all_analytic() {
        let mut worst = (0.0f64, None);
        for (ctx, d) in ev.contexts().iter().zip(all) {
            for (f, a) in ask_pairs(ctx) {
                let p: f64 = d
                    .support
                    .iter()
                    .filter(|(r, _)| r[f] != Outcome::Null && r[a] != Outcome::Null && r[f] != r[a])
                    .map(|(_, p)| p)
                    .sum();
                if p > worst.0 {
                    worst = (p, Some(ctx.label()));
                }
            }
        }
        let verdict = if worst.0 > tol { Verdict::Violated } else { Verdict::Satisfied };
        paths.push(
            Evidence::new(
                Method::Analytic,
                verdict,
                format!("largest probability that the heard value differs from the record: {:.6}", worst.0),
            )
            .context(worst.1)
            .test(worst.0, tol),
        );
    }
    let mut worst = (0.0f64, None);
    let mut witness = None;
    let mut checked = 0;
    for b in &ev.batches {
        for (f, a) in ask_pairs(&b.context) {
            let mut mismatches = 0usize;
            for (i, r) in b.records.iter().enumerate() {
                let (x, y) = (r.values(f)[0], r.values(a)[0]);
                if x == Outcome::Null || y == Outcome::Null {
                    continue;
                }
                if x != y {
                    mismatches += 1;
                    if witness.is_none() {
                        witness = Some(RunWitness::new(b, i));
                    }
                }
            }
            checked += b.count();
            let rate = mismatches as f64 / b.count() as f64;
            if rate > worst.0 {
                worst = (rate, Some(b.context.label()));
            }
        }
    }
    let verdict = if witness.is_some() { Verdict::Violated } else { Verdict::Satisfied };
    paths.push(
        Evidence::new(
            Method::Structural,
            verdict,
            format!("largest mismatch rate between heard value and record: {:.6}", worst.0),
        )
        .context(worst.1)
        .test(worst.0, 0.0)
        .samples(checked)
        .witness(witness),
    );
    FlagResult::from_paths(paths)
}

/// Slots holding what `observer` has access to in `context`, with the
/// variable each holds. A friend reads their own records; everyone else
/// reads superobserver slots (which hold the heard value when asking).
pub fn observer_view(s: &Scenario, observer: &str, context: &Context) -> Vec<(usize, String)> {
    let n = s.wings().len();
    let mut out = Vec::new();
    for var in s.accessible_variables(observer, context) {
        let own = (0..n).find(|&w| s.wings()[w].friend == observer && s.wings()[w].friend_var == var);
        let slot = own.or_else(|| {
            (0..n)
                .find(|&w| s.wings()[w].observed_var(context.options[w]) == var)
                .map(|w| n + w)
        });
        if let Some(slot) = slot {
            out.push((slot, var));
        }
    }
    out.sort();
    out
}

/// A comparison of one observer's view in one context.
struct View {
    observer: String,
    context: Context,
    slots: Vec<usize>,
    vars: Vec<String>,
}

fn views(s: &Scenario) -> Vec<View> {
    let mut out = Vec::new();
    for ctx in s.contexts() {
        for party in s.parties() {
            let v = observer_view(s, &party.name, ctx);
            if v.is_empty() {
                continue;
            }
            out.push(View {
                observer: party.name.clone(),
                context: ctx.clone(),
                slots: v.iter().map(|(s, _)| *s).collect(),
                vars: v.into_iter().map(|(_, v)| v).collect(),
            });
        }
    }
    out
}

/// Positions of the view that the context prediction covers. A friend's
/// record of a supermeasured lab is not among them.
fn covered(ev: &Evaluation<'_>, view: &View, candidates: &[usize]) -> Vec<usize> {
    let q = &ev.quantum[view.context.index];
    candidates
        .iter()
        .copied()
        .filter(|&i| q.variables().contains(&view.vars[i]))
        .collect()
}

/// Unitary prediction for the kept positions of the view.
fn reference(ev: &Evaluation<'_>, view: &View, keep: &[usize]) -> Result<BTreeMap<Vec<Outcome>, f64>, CheckError> {
    let vars: Vec<&str> = keep.iter().map(|&i| view.vars[i].as_str()).collect();
    let table = ev.quantum[view.context.index]
        .marginal(&vars)
        .map_err(crate::predict::PredictError::from)?;
    Ok(sign_map(&table))
}

/// Positions within the view whose slot is Null in every case.
fn always_null(marg: &BTreeMap<Vec<Outcome>, f64>, width: usize) -> Vec<bool> {
    (0..width)
        .map(|i| marg.iter().all(|(k, p)| k[i] == Outcome::Null || *p == 0.0))
        .collect()
}

fn restrict(marg: &BTreeMap<Vec<Outcome>, f64>, keep: &[usize]) -> BTreeMap<Vec<Outcome>, f64> {
    let mut out = BTreeMap::new();
    for (k, p) in marg {
        *out.entry(keep.iter().map(|&i| k[i]).collect()).or_insert(0.0) += p;
    }
    out
}

/// Each observer's view follows the unitary prediction for the context,
/// restricted to the variables that prediction covers. Events that never
/// occur for the model (Null on every run) are set aside and the verdict is
/// qualified instead.
pub fn check_first_person_universality(ev: &Evaluation<'_>) -> Result<FlagResult, CheckError> {
    let s = ev.model.scenario();
    let views = views(s);
    let tol = ev.settings.analytic_tolerance;
    let mut paths = Vec::new();

    if let Some(all) = ev.all_analytic() {
        let mut worst: (f64, f64, Option<String>, String) = (0.0, 0.0, None, String::new());
        let mut dropped = false;
        for v in &views {
            let marg = all[v.context.index].marginal(&v.slots);
            let nulls = always_null(&marg, v.slots.len());
            dropped |= nulls.iter().any(|&b| b);
            let live: Vec<usize> = (0..v.slots.len()).filter(|&i| !nulls[i]).collect();
            let keep = covered(ev, v, &live);
            if keep.is_empty() {
                continue;
            }
            let reference = reference(ev, v, &keep)?;
            let model = restrict(&marg, &keep);
            let gap = max_gap(&model, &reference);
            if gap > worst.0 {
                let vars: Vec<&str> = keep.iter().map(|&i| v.vars[i].as_str()).collect();
                worst = (
                    gap,
                    total_variation(&model, &reference),
                    Some(v.context.label()),
                    format!("{} on ({})", v.observer, vars.join(", ")),
                );
            }
        }
        let verdict = if worst.0 > tol {
            Verdict::Violated
        } else if dropped {
            Verdict::SatisfiedWithNulls
        } else {
            Verdict::Satisfied
        };
        let summary = if worst.3.is_empty() {
            "every observer's view matches the unitary prediction exactly".to_string()
        } else {
            format!(
                "largest cell deviation {:.3e} (total variation {:.6}) for {}",
                worst.0, worst.1, worst.3
            )
        };
        paths.push(
            Evidence::new(Method::Analytic, verdict, summary)
                .context(worst.2)
                .test(worst.0, tol),
        );
    }

    // statistical path: every cell of every comparison at a joint level
    let mut prepared = Vec::new();
    let mut cells = 0usize;
    let mut dropped = false;
    for v in &views {
        let batch = &ev.batches[v.context.index];
        let counts = empirical(batch, &v.slots);
        let freq = frequencies(&counts, batch.count());
        let nulls = always_null(&freq, v.slots.len());
        dropped |= nulls.iter().any(|&b| b);
        let live: Vec<usize> = (0..v.slots.len()).filter(|&i| !nulls[i]).collect();
        let keep = covered(ev, v, &live);
        if keep.is_empty() {
            continue;
        }
        let reference = reference(ev, v, &keep)?;
        let model = restrict(&freq, &keep);
        cells += model.keys().chain(reference.keys()).collect::<BTreeSet<_>>().len();
        prepared.push((v, keep, model, reference, batch.count()));
    }
    let sigma = cell_sigma(ev.settings.significance, cells);
    let mut worst: (f64, f64, f64, Option<String>, String) = (0.0, 0.0, 0.0, None, String::new());
    for (v, keep, model, reference, n) in &prepared {
        let keys: BTreeSet<&Vec<Outcome>> = model.keys().chain(reference.keys()).collect();
        for k in keys {
            let p = reference.get(k).copied().unwrap_or(0.0);
            let f = model.get(k).copied().unwrap_or(0.0);
            let bound = cell_bound(p, *n, sigma);
            let ratio = (f - p).abs() / bound;
            if ratio > worst.0 {
                let vars: Vec<&str> = keep.iter().map(|&i| v.vars[i].as_str()).collect();
                worst = (
                    ratio,
                    (f - p).abs(),
                    bound,
                    Some(v.context.label()),
                    format!("{} on ({})", v.observer, vars.join(", ")),
                );
            }
        }
    }
    let verdict = if worst.0 > 1.0 {
        Verdict::Violated
    } else if dropped {
        Verdict::SatisfiedWithNulls
    } else {
        Verdict::Satisfied
    };
    paths.push(
        Evidence::new(
            Method::Statistical,
            verdict,
            format!(
                "worst cell: deviation {:.6} against bound {:.6} ({sigma:.2} sigma over {cells} cells) for {}",
                worst.1, worst.2, worst.4
            ),
        )
        .context(worst.3)
        .test(worst.1, worst.2)
        .samples(ev.batches.iter().map(|b| b.count()).sum()),
    );
    Ok(FlagResult::from_paths(paths))
}

/// Distributions of `slots` across a group of contexts must coincide.
struct Homogeneity {
    label: String,
    slots: Vec<usize>,
    contexts: Vec<usize>,
}

fn homogeneity(ev: &Evaluation<'_>, tests: &[Homogeneity], what: &str) -> FlagResult {
    let tol = ev.settings.analytic_tolerance;
    let mut paths = Vec::new();
    if tests.is_empty() {
        return FlagResult::not_applicable("no pair of contexts to compare");
    }
    if let Some(all) = ev.all_analytic() {
        let mut worst: (f64, Option<String>, String) = (0.0, None, String::new());
        for t in tests {
            let dists: Vec<(usize, BTreeMap<Vec<Outcome>, f64>)> = t
                .contexts
                .iter()
                .map(|&c| (c, all[c].marginal(&t.slots)))
                .collect();
            for (c, d) in &dists[1..] {
                let gap = max_gap(&dists[0].1, d);
                if gap > worst.0 {
                    let ctxs = ev.contexts();
                    worst = (
                        gap,
                        Some(ctxs[*c].label()),
                        format!("{} between {} and {}", t.label, ctxs[dists[0].0].label(), ctxs[*c].label()),
                    );
                }
            }
        }
        let verdict = if worst.0 > tol { Verdict::Violated } else { Verdict::Satisfied };
        let summary = if worst.2.is_empty() {
            format!("{what} identical across contexts")
        } else {
            format!("largest cell difference {:.6} in {}", worst.0, worst.2)
        };
        paths.push(
            Evidence::new(Method::Analytic, verdict, summary)
                .context(worst.1)
                .test(worst.0, tol),
        );
    }
    let alpha = ev.settings.significance / tests.len() as f64;
    let mut worst: (f64, f64, Option<String>, String) = (1.0, 0.0, None, String::new());
    for t in tests {
        let counts: Vec<BTreeMap<Vec<Outcome>, u64>> = t
            .contexts
            .iter()
            .map(|&c| empirical(&ev.batches[c], &t.slots))
            .collect();
        let keys: BTreeSet<&Vec<Outcome>> = counts.iter().flat_map(|m| m.keys()).collect();
        let table: Vec<Vec<u64>> = counts
            .iter()
            .map(|m| keys.iter().map(|k| m.get(*k).copied().unwrap_or(0)).collect())
            .collect();
        let test = chi_square_homogeneity(&table);
        if test.p_value < worst.0 || worst.3.is_empty() {
            worst = (test.p_value, test.statistic, None, format!("{} (dof {})", t.label, test.dof));
        }
    }
    let verdict = if worst.0 < alpha { Verdict::Violated } else { Verdict::Satisfied };
    paths.push(
        Evidence::new(
            Method::Statistical,
            verdict,
            format!(
                "smallest homogeneity p-value {:.3e} (chi-square {:.3}) for {}; level {:.1e} per test",
                worst.0, worst.1, worst.3, alpha
            ),
        )
        .context(worst.2)
        .test(worst.0, alpha)
        .samples(ev.batches.iter().map(|b| b.count()).sum()),
    );
    FlagResult::from_paths(paths)
}

/// Friends' records (Null as its own value) do not depend on the context.
pub fn check_no_superdeterminism(ev: &Evaluation<'_>) -> FlagResult {
    let s = ev.model.scenario();
    let n = s.wings().len();
    let vars: Vec<&str> = s.wings().iter().map(|w| w.friend_var.as_str()).collect();
    let tests = if s.contexts().len() < 2 {
        Vec::new()
    } else {
        vec![Homogeneity {
            label: format!("friend records ({})", vars.join(", ")),
            slots: (0..n).collect(),
            contexts: (0..s.contexts().len()).collect(),
        }]
    };
    homogeneity(ev, &tests, "friend records")
}

/// Each wing's records, given that wing's own choice, do not depend on the
/// other wings' choices.
pub fn check_locality(ev: &Evaluation<'_>) -> FlagResult {
    let s = ev.model.scenario();
    let n = s.wings().len();
    if n < 2 {
        return FlagResult::not_applicable("a single wing has no distant setting");
    }
    let mut tests = Vec::new();
    for (w, wing) in s.wings().iter().enumerate() {
        for &option in &wing.menu.options {
            let contexts: Vec<usize> = s
                .contexts()
                .iter()
                .filter(|c| c.options[w] == option)
                .map(|c| c.index)
                .collect();
            if contexts.len() < 2 {
                continue;
            }
            let key = |party: &str, var: &str| format!("{party}:{var} given {}={}", wing.superobserver, option.kind());
            tests.push(Homogeneity {
                label: key(&wing.friend, &wing.friend_var),
                slots: vec![w],
                contexts: contexts.clone(),
            });
            tests.push(Homogeneity {
                label: key(&wing.superobserver, wing.observed_var(option)),
                slots: vec![n + w],
                contexts,
            });
        }
    }
    homogeneity(ev, &tests, "single-wing marginals")
}

/// No choice is informed by an outcome that the model lets depend on that
/// choice.
pub fn check_paradox_freedom(model: &dyn ExtensionModel) -> FlagResult {
    let g = model.scenario().graph();
    let deps = model.context_dependencies();
    let loop_ = deps.iter().find(|(o, x)| g.precedes(*o, *x));
    let e = match loop_ {
        Some((o, x)) => Evidence::new(
            Method::Structural,
            Verdict::Violated,
            format!("{o:?} depends on {x:?} and its record reaches {x:?}"),
        ),
        None => Evidence::new(
            Method::Structural,
            Verdict::Satisfied,
            format!("none of {} declared dependencies runs against a graph path", deps.len()),
        ),
    };
    FlagResult::from_paths(vec![e])
}
