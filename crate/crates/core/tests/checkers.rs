use friendlab_core::checkers::{
    flag_report, report_from, theorem_report, upholds_everything, CheckSettings, DisaccordType,
    Evaluation, Evidence, FlagReport, FlagResult, Method, TheoremEvidence, Verdict, FLAG_NAMES,
};
use friendlab_core::models::{
    AnswerTampering, CollapseAtFriend, ExtensionModel, LeakySetting, ModelSpec, NaiveAbsolute,
    NaiveStrategy, RqmCpl, Tamper, TwoValued, MODEL_NAMES,
};
use friendlab_core::quantum::PureState;
use friendlab_core::scenario::{build_bong, Event, Scenario, ScenarioKind, ScenarioSpec};
use proptest::prelude::*;

fn preset(kind: ScenarioKind) -> Scenario {
    ScenarioSpec::preset(kind).build().unwrap()
}

fn settings(samples: usize) -> CheckSettings {
    CheckSettings {
        samples,
        seed: 9,
        ..CheckSettings::default()
    }
}

fn zoo(s: &Scenario) -> Vec<Box<dyn ExtensionModel>> {
    MODEL_NAMES.iter().map(|n| ModelSpec::named(n).build(s).unwrap()).collect()
}

fn controls(s: &Scenario) -> Vec<Box<dyn ExtensionModel>> {
    let base = || -> Box<dyn ExtensionModel> { Box::new(CollapseAtFriend::new(s).unwrap()) };
    vec![
        Box::new(TwoValued::new(base(), 0)),
        Box::new(AnswerTampering::new(base(), Tamper::Flip)),
        Box::new(AnswerTampering::new(Box::new(RqmCpl::new(s).unwrap()), Tamper::Uniform)),
        Box::new(LeakySetting::new(Box::new(RqmCpl::new(s).unwrap()), 0, 1)),
    ]
}

fn verdict(r: &FlagReport, flag: &str) -> Verdict {
    r.verdict(flag).unwrap()
}

#[test]
fn negative_controls_trip_their_flags() {
    let s = preset(ScenarioKind::Bong);
    let reports: Vec<FlagReport> = controls(&s)
        .iter()
        .map(|m| flag_report(m.as_ref(), settings(20_000)).unwrap())
        .collect();
    assert_eq!(verdict(&reports[0], "aoe1"), Verdict::Violated);
    assert_eq!(verdict(&reports[1], "aoe2"), Verdict::Violated);
    assert_eq!(verdict(&reports[2], "aoe2"), Verdict::Violated);
    assert_eq!(verdict(&reports[3], "locality"), Verdict::Violated);
    assert_eq!(verdict(&reports[3], "aoe2"), Verdict::Satisfied);
    for r in &reports {
        assert!(r.paths_agree(), "{}", r.model);
    }
}

#[test]
fn a_dependency_against_a_record_path_breaks_paradox_freedom() {
    let s = preset(ScenarioKind::Bong);
    let leaky = |s: &Scenario| LeakySetting::new(Box::new(RqmCpl::new(s).unwrap()), 0, 1);
    let plain = flag_report(&leaky(&s), settings(2_000)).unwrap();
    assert_eq!(verdict(&plain, "paradox-freedom"), Verdict::Satisfied);
    let looped = s.with_leak(Event::FriendMeasurement(1), Event::Choice(0)).unwrap();
    let r = flag_report(&leaky(&looped), settings(2_000)).unwrap();
    assert_eq!(verdict(&r, "paradox-freedom"), Verdict::Violated);
}

fn witnesses(r: &FlagReport) -> Vec<&friendlab_core::checkers::RunWitness> {
    let from_flags = r
        .flags
        .values()
        .flat_map(|f| &f.evidence)
        .filter_map(|e: &Evidence| e.witness.as_ref());
    let from_disaccord = r.disaccord.witnesses.iter().filter_map(|w| w.run.as_ref());
    from_flags.chain(from_disaccord).collect()
}

#[test]
fn every_witness_replays_from_its_seed_and_index() {
    for kind in ScenarioKind::ALL {
        let s = preset(kind);
        let mut models = zoo(&s);
        if kind != ScenarioKind::OrmrodBarrett {
            models.extend(controls(&s).into_iter().filter(|m| kind != ScenarioKind::Wigner || m.name() != "leaky-setting"));
        }
        let mut seen = 0;
        for m in &models {
            let r = flag_report(m.as_ref(), settings(2_000)).unwrap();
            for w in witnesses(&r) {
                assert!(w.replays(m.as_ref()), "{} {} {}", kind.id(), m.name(), w.context);
                seen += 1;
            }
        }
        assert!(seen > 0, "{}", kind.id());
    }
}

#[test]
fn type_three_disaccord_goes_with_a_tracking_violation() {
    for kind in [ScenarioKind::Wigner, ScenarioKind::Bong, ScenarioKind::Lawrence] {
        let s = preset(kind);
        let mut models = zoo(&s);
        models.extend(controls(&s).into_iter().filter(|m| kind == ScenarioKind::Bong || m.name() != "leaky-setting"));
        for m in &models {
            let r = flag_report(m.as_ref(), settings(5_000)).unwrap();
            assert_eq!(
                r.disaccord.types.contains(&DisaccordType::III),
                verdict(&r, "aoe2") == Verdict::Violated,
                "{} {}",
                kind.id(),
                m.name()
            );
        }
    }
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let s = preset(ScenarioKind::Bong);
    for m in zoo(&s) {
        let a = flag_report(m.as_ref(), settings(5_000)).unwrap();
        let b = flag_report(m.as_ref(), settings(5_000)).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        let back: FlagReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.flags.keys().map(String::as_str).collect::<Vec<_>>(), {
            let mut names = FLAG_NAMES.to_vec();
            names.sort_unstable();
            names
        });
    }
}

#[test]
fn no_zoo_model_upholds_every_assumption_at_the_chsh_configuration() {
    let s = preset(ScenarioKind::Bong);
    let models = zoo(&s);
    let refs: Vec<&dyn ExtensionModel> = models.iter().map(|m| m.as_ref()).collect();
    let t = theorem_report(&s, &refs, settings(20_000)).unwrap();
    assert!(t.contradiction);
    assert!(t.upholds_everything.is_empty(), "{:?}", t.upholds_everything);
    for row in &t.rows {
        assert!(!upholds_everything(row), "{}", row.model);
        assert!(row.paths_agree(), "{}", row.model);
    }
}

#[test]
fn theorem_evidence_per_scenario() {
    let none = TheoremEvidence::for_scenario(&preset(ScenarioKind::Wigner)).unwrap();
    assert_eq!(none, TheoremEvidence::None);
    assert!(!none.contradiction());
    match TheoremEvidence::for_scenario(&preset(ScenarioKind::Bong)).unwrap() {
        e @ TheoremEvidence::Bong { chsh, .. } => {
            assert!((chsh - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
            assert!(e.contradiction());
        }
        other => panic!("{other:?}"),
    }
    match TheoremEvidence::for_scenario(&preset(ScenarioKind::Lawrence)).unwrap() {
        TheoremEvidence::Lawrence { assignments, .. } => assert!(assignments.is_empty()),
        other => panic!("{other:?}"),
    }
    let ob = TheoremEvidence::for_scenario(&preset(ScenarioKind::OrmrodBarrett)).unwrap();
    assert!(matches!(ob, TheoremEvidence::OrmrodBarrett { .. }) && ob.contradiction());
    let equal = build_bong(&PureState::singlet("x", "y"), 0.0, 0.0, 0.0, 0.0).unwrap();
    assert!(!TheoremEvidence::for_scenario(&equal).unwrap().contradiction());
}

#[test]
fn naive_model_keeps_first_person_universality_without_a_violation() {
    let s = build_bong(&PureState::singlet("x", "y"), 0.0, 0.0, 0.0, 0.0).unwrap();
    let m = NaiveAbsolute::new(&s, NaiveStrategy::ClassicalOptimal).unwrap();
    let r = flag_report(&m, settings(20_000)).unwrap();
    assert_eq!(verdict(&r, "first-person-universality"), Verdict::Satisfied);
    assert!(r.paths_agree());
}

#[test]
fn statistical_paths_carry_their_thresholds() {
    let s = preset(ScenarioKind::Bong);
    let m = CollapseAtFriend::new(&s).unwrap();
    let ev = Evaluation::new(&m, settings(20_000)).unwrap();
    let r = report_from(&ev).unwrap();
    let fpu = &r.flags["first-person-universality"];
    let stat = fpu.path(Method::Statistical).unwrap();
    assert_eq!(stat.verdict, Verdict::Violated);
    assert!(stat.statistic.unwrap() > stat.threshold.unwrap());
    assert_eq!(stat.samples, Some(4 * 20_000));
}

#[test]
fn invalid_settings_are_rejected() {
    let s = preset(ScenarioKind::Wigner);
    let m = CollapseAtFriend::new(&s).unwrap();
    assert!(flag_report(&m, settings(0)).is_err());
    let bad = CheckSettings {
        significance: 1.5,
        ..settings(10)
    };
    assert!(flag_report(&m, bad).is_err());
}

fn arb_verdict() -> impl Strategy<Value = Verdict> {
    prop_oneof![
        Just(Verdict::NotApplicable),
        Just(Verdict::Satisfied),
        Just(Verdict::SatisfiedWithNulls),
        Just(Verdict::Violated),
    ]
}

proptest! {
    #[test]
    fn flag_verdict_is_the_most_severe_path(vs in prop::collection::vec(arb_verdict(), 1..4)) {
        let paths: Vec<Evidence> = vs.iter().map(|&v| Evidence::new(Method::Structural, v, "")).collect();
        let f = FlagResult::from_paths(paths);
        prop_assert_eq!(f.verdict, *vs.iter().max().unwrap());
        prop_assert!(vs.iter().all(|v| *v <= f.verdict));
        prop_assert_eq!(f.paths_agree(), vs.iter().all(|v| *v == vs[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn collapse_keeps_tracking_and_consistency_at_any_angles(
        angles in prop::array::uniform4(-3.0f64..3.0),
        seed in any::<u64>(),
    ) {
        let s = build_bong(&PureState::singlet("x", "y"), angles[0], angles[1], angles[2], angles[3]).unwrap();
        let m = CollapseAtFriend::new(&s).unwrap();
        let r = flag_report(&m, CheckSettings { samples: 2_000, seed, ..CheckSettings::default() }).unwrap();
        prop_assert_eq!(verdict(&r, "aoe1"), Verdict::Satisfied);
        prop_assert_eq!(verdict(&r, "aoe2"), Verdict::Satisfied);
        prop_assert_eq!(verdict(&r, "paradox-freedom"), Verdict::Satisfied);
        prop_assert!(!r.disaccord.types.contains(&DisaccordType::III));
    }
}
