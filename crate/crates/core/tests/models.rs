use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use friendlab_core::models::{
    run_rng, sample_runs, AnswerTampering, CollapseAtFriend, ExtensionModel, KentFinalMeasurement,
    LeakySetting, ModelSpec, NaiveAbsolute, NaiveStrategy, RqmCpl, Tamper, TwoValued, MODEL_NAMES,
};
use friendlab_core::predict::{chsh_value, context_distribution, pair_tables, CorrelatorSet};
use friendlab_core::quantum::PureState;
use friendlab_core::record::{Outcome, RunBatch};
use friendlab_core::scenario::{build_bong, MenuOption, OptionKind, Scenario, ScenarioKind, ScenarioSpec};
use friendlab_core::stats::{cell_bound, cell_sigma, CELL_SLACK, SIGNIFICANCE};

fn preset(kind: ScenarioKind) -> Scenario {
    ScenarioSpec::preset(kind).build().unwrap()
}

fn all_models(s: &Scenario) -> Vec<Box<dyn ExtensionModel>> {
    MODEL_NAMES.iter().map(|n| ModelSpec::named(n).build(s).unwrap()).collect()
}

fn counts(batch: &RunBatch) -> BTreeMap<Vec<Outcome>, u64> {
    let mut out = BTreeMap::new();
    for r in &batch.records {
        let key: Vec<Outcome> = (0..r.len()).map(|s| r.values(s)[0]).collect();
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Mean of the product of two slots over records where both are definite.
fn correlator(batch: &RunBatch, a: usize, b: usize) -> (f64, usize) {
    let (mut sum, mut n) = (0i64, 0usize);
    for r in &batch.records {
        if let Some(v) = r.signs(&[a, b]) {
            sum += i64::from(v[0] * v[1]);
            n += 1;
        }
    }
    (sum as f64 / n as f64, n)
}

#[test]
fn analytic_distributions_are_normalized_with_full_records() {
    for kind in ScenarioKind::ALL {
        let s = preset(kind);
        for m in all_models(&s) {
            for ctx in s.contexts() {
                let Some(d) = m.analytic(ctx) else { continue };
                let total: f64 = d.support.iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12, "{} {} {}", kind.id(), m.name(), ctx.label());
                assert!(d.support.iter().all(|(r, p)| *p > 0.0 && r.len() == m.layout(ctx).len()));
            }
        }
    }
}

#[test]
fn samples_match_analytic_within_bonferroni_bounds() {
    let n = 20_000;
    for kind in ScenarioKind::ALL {
        let s = preset(kind);
        for m in all_models(&s) {
            for ctx in s.contexts() {
                let Some(d) = m.analytic(ctx) else { continue };
                let batch = sample_runs(m.as_ref(), ctx, n, 7).unwrap();
                let c = counts(&batch);
                let sigma = cell_sigma(SIGNIFICANCE, d.support.len().max(1));
                for (rec, p) in &d.support {
                    let freq = c.get(rec).copied().unwrap_or(0) as f64 / n as f64;
                    let bound = cell_bound(*p, n, sigma) + CELL_SLACK;
                    assert!((freq - p).abs() <= bound, "{} {} {}: {freq} vs {p}", kind.id(), m.name(), ctx.label());
                }
                let outside = c.keys().filter(|k| !d.support.iter().any(|(r, _)| r == *k)).count();
                assert_eq!(outside, 0, "{} {} sampled a record of probability zero", kind.id(), m.name());
            }
        }
    }
}

#[test]
fn kent_nulls_sit_exactly_at_supermeasured_friends() {
    for kind in ScenarioKind::ALL {
        let s = preset(kind);
        let m = KentFinalMeasurement::new(&s).unwrap();
        for ctx in s.contexts() {
            let batch = sample_runs(&m, ctx, 2_000, 3).unwrap();
            for (w, opt) in ctx.options.iter().enumerate() {
                let slot = batch.layout.friend_slot(w);
                let supermeasured = matches!(opt, MenuOption::Super(_));
                for r in &batch.records {
                    assert_eq!(r.values(slot)[0] == Outcome::Null, supermeasured, "{} {}", kind.id(), ctx.label());
                    assert_ne!(r.values(batch.layout.super_slot(w))[0], Outcome::Null);
                }
                let d = m.analytic(ctx).unwrap();
                let null_mass: f64 = d
                    .marginal(&[slot])
                    .get(&vec![Outcome::Null])
                    .copied()
                    .unwrap_or(0.0);
                assert!((null_mass - if supermeasured { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn runs_are_reproducible_from_seed_context_and_index() {
    let s = preset(ScenarioKind::Bong);
    for m in all_models(&s) {
        for ctx in s.contexts() {
            let a = sample_runs(m.as_ref(), ctx, 500, 11).unwrap();
            let b = sample_runs(m.as_ref(), ctx, 500, 11).unwrap();
            assert_eq!(a.to_jsonl(), b.to_jsonl());
            let single = m.sample(ctx, &mut run_rng(11, ctx.index, 123));
            assert_eq!(single, a.records[123]);
            let other = sample_runs(m.as_ref(), ctx, 500, 12).unwrap();
            assert_ne!(a.to_jsonl(), other.to_jsonl(), "{} {}", m.name(), ctx.label());
        }
    }
}

#[test]
fn collapse_halves_the_certain_outcome_of_a_wigner_supermeasurement() {
    let s = preset(ScenarioKind::Wigner);
    let ctx = s.context_by_kinds(&[OptionKind::Super]).unwrap();
    // The lab evolves to an eigenstate of the supermeasured observable.
    let quantum = context_distribution(&s, ctx).unwrap();
    assert!((quantum.prob(&[1]) - 1.0).abs() < 1e-12);
    let m = CollapseAtFriend::new(&s).unwrap();
    let d = m.analytic(ctx).unwrap();
    let plus = d.marginal(&[1]).get(&vec![Outcome::Plus]).copied().unwrap();
    assert!((plus - 0.5).abs() < 1e-12);
}

fn naive(s: &Scenario, strategy: NaiveStrategy) -> NaiveAbsolute {
    NaiveAbsolute::new(s, strategy).unwrap()
}

/// Correlator of each pair in the order `AB, AD, CB, CD` from a model's
/// analytic distribution in the matching context.
fn model_correlators(m: &dyn ExtensionModel) -> [f64; 4] {
    use OptionKind::{Ask, Super};
    let s = m.scenario();
    let mut out = [0.0; 4];
    for (k, kinds) in [[Super, Super], [Super, Ask], [Ask, Super], [Ask, Ask]].iter().enumerate() {
        let ctx = s.context_by_kinds(kinds).unwrap();
        let d = m.analytic(ctx).unwrap();
        out[k] = d
            .marginal(&[2, 3])
            .iter()
            .map(|(r, p)| f64::from(r[0].sign().unwrap() * r[1].sign().unwrap()) * p)
            .sum();
    }
    out
}

#[test]
fn classical_optimal_naive_model_misses_some_correlator_by_the_chsh_gap() {
    let s = preset(ScenarioKind::Bong);
    let e = model_correlators(&naive(&s, NaiveStrategy::ClassicalOptimal));
    let quantum: Vec<f64> = pair_tables(&s)
        .unwrap()
        .iter()
        .map(|t| {
            let v: Vec<&str> = t.variables().iter().map(String::as_str).collect();
            t.correlator(&v).unwrap()
        })
        .collect();
    // Any classical model stays within CHSH 2, so the four correlators
    // together must give up 2√2 − 2; spread evenly that is a quarter each.
    let gap = e.iter().zip(&quantum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap >= (2.0 * SQRT_2 - 2.0) / 4.0 - 1e-9, "gap {gap}");
    assert!(chsh_value(&CorrelatorSet::from_array(e)) <= 2.0 + 1e-12);
}

#[test]
fn uniform_naive_model_has_zero_correlators() {
    let s = preset(ScenarioKind::Bong);
    for e in model_correlators(&naive(&s, NaiveStrategy::Uniform)) {
        assert!(e.abs() < 1e-12);
    }
}

#[test]
fn naive_model_reproduces_non_violating_statistics() {
    let s = build_bong(&PureState::singlet("x", "y"), 0.0, 0.0, 0.0, 0.0).unwrap();
    let m = naive(&s, NaiveStrategy::ClassicalOptimal);
    for ctx in s.contexts() {
        let q = context_distribution(&s, ctx).unwrap();
        let d = m.analytic(ctx).unwrap();
        for (label, p) in q.cells() {
            let key: Vec<Outcome> = label.iter().map(|&v| Outcome::from_sign(v)).collect();
            let got = d.marginal(&[2, 3]).get(&key).copied().unwrap_or(0.0);
            assert!((got - p).abs() < 1e-9, "{} {label:?}", ctx.label());
        }
    }
}

#[test]
fn rqm_cpl_heard_values_carry_the_singlet_correlation() {
    let s = preset(ScenarioKind::Bong);
    let m = RqmCpl::new(&s).unwrap();
    let ctx = s.context_by_kinds(&[OptionKind::Ask, OptionKind::Ask]).unwrap();
    let n = 100_000;
    let batch = sample_runs(&m, ctx, n, 5).unwrap();
    let (e, used) = correlator(&batch, 2, 3);
    assert_eq!(used, n);
    let expected = -FRAC_1_SQRT_2;
    let sd = ((1.0 - expected * expected) / n as f64).sqrt();
    assert!((e - expected).abs() <= 3.0 * sd, "E = {e}");
}

#[test]
fn two_valued_control_gives_the_friend_both_outcomes() {
    let s = preset(ScenarioKind::Wigner);
    let m = TwoValued::new(Box::new(CollapseAtFriend::new(&s).unwrap()), 0);
    assert!(m.analytic(&s.contexts()[0]).is_none());
    for ctx in s.contexts() {
        let batch = sample_runs(&m, ctx, 200, 1).unwrap();
        for r in &batch.records {
            let v = r.values(0);
            assert_eq!(v.len(), 2);
            assert_eq!(v[0].sign().unwrap(), -v[1].sign().unwrap());
        }
    }
}

#[test]
fn leaky_control_pins_the_distant_friend_when_the_setting_is_super() {
    let s = preset(ScenarioKind::Bong);
    let m = LeakySetting::new(Box::new(RqmCpl::new(&s).unwrap()), 0, 1);
    for ctx in s.contexts() {
        let batch = sample_runs(&m, ctx, 500, 2).unwrap();
        let pinned = batch.records.iter().all(|r| r.values(1)[0] == Outcome::Plus);
        assert_eq!(pinned, matches!(ctx.options[0], MenuOption::Super(_)), "{}", ctx.label());
        if ctx.kinds() == [OptionKind::Super, OptionKind::Ask] {
            assert!(batch.records.iter().all(|r| r.values(3)[0] == Outcome::Plus));
        }
    }
}

#[test]
fn tampering_controls_break_what_the_asker_hears() {
    let s = preset(ScenarioKind::Wigner);
    let ask = s.context_by_kinds(&[OptionKind::Ask]).unwrap();
    let flip = AnswerTampering::new(Box::new(RqmCpl::new(&s).unwrap()), Tamper::Flip);
    let d = flip.analytic(ask).unwrap();
    for (r, _) in &d.support {
        assert_eq!(r[1].sign().unwrap(), -r[0].sign().unwrap());
    }
    let coin = AnswerTampering::new(Box::new(RqmCpl::new(&s).unwrap()), Tamper::Uniform);
    let d = coin.analytic(ask).unwrap();
    let agree: f64 = d.support.iter().filter(|(r, _)| r[0] == r[1]).map(|(_, p)| p).sum();
    assert!((agree - 0.5).abs() < 1e-12);
}

#[test]
fn model_specs_reject_unknown_names_and_parameters() {
    let s = preset(ScenarioKind::Bong);
    assert!(ModelSpec::named("many-worlds").build(&s).is_err());
    let mut spec = ModelSpec::named("kent");
    spec.params.insert("speed".into(), serde_json::json!(1));
    assert!(spec.build(&s).is_err());
    let mut spec = ModelSpec::named("naive-absolute");
    spec.params.insert("strategy".into(), serde_json::json!("uniform"));
    assert!(spec.build(&s).is_ok());
}

#[test]
fn supermeasurement_along_the_friend_basis_is_a_plain_readout() {
    // Super angle equal to the friend's basis: the superobserver learns
    // the friend's outcome, so the Wigner table is the friend's own.
    let s = friendlab_core::scenario::build_wigner_friend(&PureState::plus("q"), 0.0, 0.0).unwrap();
    let ctx = s.context_by_kinds(&[OptionKind::Super]).unwrap();
    let q = context_distribution(&s, ctx).unwrap();
    assert!((q.prob(&[1]) - 0.5).abs() < 1e-12);
}
