//! Replays the checked-in fuzz seeds through the same checks as the fuzz
//! targets.

use std::path::PathBuf;

use friendlab_cli::report::parse_markdown_rows;
use friendlab_cli::{Format, Report, RunConfig};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .filter_map(|e| String::from_utf8(std::fs::read(e.unwrap().path()).unwrap()).ok())
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn run_config_seeds() {
    let mut parsed = 0;
    for text in seeds("run_config") {
        if let Ok(config) = text.parse::<RunConfig>() {
            let again: RunConfig = config.to_toml().unwrap().parse().unwrap();
            assert_eq!(again, config);
            let _ = config.scenario.build();
            parsed += 1;
        }
    }
    assert!(parsed >= 6);
}

#[test]
fn report_json_seeds() {
    let mut parsed = 0;
    for text in seeds("report_json") {
        if let Ok(report) = Report::from_json(&text) {
            let json = report.render(Format::Json).unwrap();
            assert_eq!(Report::from_json(&json).unwrap(), report);
            parsed += 1;
        }
    }
    assert_eq!(parsed, 3);
}

#[test]
fn markdown_rows_seeds() {
    let rows: usize = seeds("markdown_rows").iter().map(|t| parse_markdown_rows(t).len()).sum();
    assert!(rows > 20);
}
