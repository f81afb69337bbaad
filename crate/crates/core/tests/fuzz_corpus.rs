//! Replays the checked-in fuzz seeds through the same checks as the fuzz
//! targets, so regressions show up without a fuzzing toolchain.

use std::path::PathBuf;

use friendlab_core::feasibility::Rational;
use friendlab_core::models::ModelSpec;
use friendlab_core::record::{parse_record_line, OutcomeRecord};
use friendlab_core::scenario::{ScenarioKind, ScenarioSpec, StateSpec};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .filter_map(|e| String::from_utf8(std::fs::read(e.unwrap().path()).unwrap()).ok())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn state_spec_seeds() {
    let parsed = seeds("state_spec").iter().filter(|s| s.parse::<StateSpec>().is_ok()).count();
    assert!(parsed >= 8);
}

#[test]
fn rational_seeds() {
    let mut parsed = 0;
    for s in seeds("rational") {
        if let Ok(r) = s.parse::<Rational>() {
            assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
            parsed += 1;
        }
    }
    assert!(parsed >= 5);
}

#[test]
fn record_line_seeds() {
    let s = ScenarioSpec::preset(ScenarioKind::Bong).build().unwrap();
    let model = ModelSpec::named("kent").build(&s).unwrap();
    let mut decoded = 0;
    for line in seeds("record_line") {
        if parse_record_line(&line).is_err() {
            continue;
        }
        for ctx in s.contexts() {
            let layout = model.layout(ctx);
            if let Ok(record) = OutcomeRecord::from_json_line(&line, &layout) {
                let again = OutcomeRecord::from_json_line(&record.to_json_line(&layout), &layout).unwrap();
                assert_eq!(again, record);
                decoded += 1;
            }
        }
    }
    assert!(decoded >= 8);
}
