use std::path::Path;

use friendlab_cli::report::parse_markdown_rows;
use friendlab_cli::{run, Report, RunConfig, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use friendlab_core::checkers::Verdict;
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn friendlab(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["friendlab"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn binary_exits_with_usage_code_on_bad_arguments() {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_friendlab"))
        .args(["predict", "--scenario", "nowhere"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&status.stderr).starts_with("error:"));
    let help = std::process::Command::new(env!("CARGO_BIN_EXE_friendlab")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
}

#[test]
fn corrupt_and_incomplete_configs_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let corrupt = write(&dir, "corrupt.toml", "[scenario\nkind = ");
    assert_eq!(friendlab(&["predict", "--config", &corrupt]).code, EXIT_USAGE);
    let unknown = write(&dir, "unknown.toml", "[scenario]\nkind = \"bong\"\nflavour = 1\n");
    assert_eq!(friendlab(&["predict", "--config", &unknown]).code, EXIT_USAGE);
    assert_eq!(friendlab(&["predict"]).code, EXIT_USAGE);
    assert_eq!(friendlab(&["predict", "--config", "/nonexistent/x.toml"]).code, EXIT_USAGE);

    let unseeded = write(&dir, "unseeded.toml", "[scenario]\nkind = \"wigner\"\n");
    let out = friendlab(&["verify", "--config", &unseeded]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("seed"), "{}", out.stderr);
    let out = friendlab(&["simulate", "--config", &unseeded, "--out", path_str(dir.path())]);
    assert_eq!(out.code, EXIT_USAGE);

    let no_baseline = write(
        &dir,
        "no-baseline.toml",
        "[scenario]\nkind = \"wigner\"\n[run]\nseed = 1\nsamples = 1000\n[[models]]\nname = \"kent\"\n",
    );
    let out = friendlab(&["verify", "--config", &no_baseline]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("kent"), "{}", out.stderr);
}

#[test]
fn inconsistent_target_marginals_are_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "targets.toml",
        r#"[scenario]
kind = "bong"

[[targets]]
variables = ["A", "B"]
probabilities = [0.25, 0.25, 0.25, 0.25]

[[targets]]
variables = ["A", "D"]
probabilities = [1.0, 0.0, 0.0, 0.0]

[[targets]]
variables = ["C", "B"]
probabilities = [0.25, 0.25, 0.25, 0.25]

[[targets]]
variables = ["C", "D"]
probabilities = [0.25, 0.25, 0.25, 0.25]
"#,
    );
    let out = friendlab(&["feasibility", "--config", &config]);
    assert_eq!(out.code, EXIT_USAGE, "{}", out.stderr);
    assert!(out.stderr.contains("input rejected"), "{}", out.stderr);
}

#[test]
fn verify_reports_a_flipped_baseline_as_a_mismatch() {
    let dir = TempDir::new().unwrap();
    let mut config = RunConfig::preset("bong").unwrap();
    config.baseline.get_mut("rqm-cpl").unwrap().no_superdeterminism = Some(Verdict::Satisfied);
    let path = write(&dir, "flipped.toml", &config.to_toml().unwrap());
    let out = friendlab(&["verify", "--config", &path, "--model", "rqm-cpl"]);
    assert_eq!(out.code, EXIT_MISMATCH);
    assert!(out.stderr.contains("mismatch: rqm-cpl no-superdeterminism"), "{}", out.stderr);
    let report = Report::from_json(&out.stdout).unwrap();
    let v = report.sections.verification.unwrap();
    assert!(!v.matches_baseline);
    assert_eq!(v.mismatches.len(), 1);
}

#[test]
fn report_echoes_a_config_that_reproduces_it() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first.json");
    let out = friendlab(&["predict", "--scenario", "bong", "--out", path_str(&first)]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let report = Report::from_json(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(report.schema, "friendlab-report/1");
    let echoed = write(&dir, "echo.toml", &report.config.to_toml().unwrap());
    let out = friendlab(&["predict", "--config", &echoed]);
    let again = Report::from_json(&out.stdout).unwrap();
    assert_eq!(again.without_timings(), report.without_timings());

    let json = serde_json::to_string(&report).unwrap();
    assert_eq!(Report::from_json(&json).unwrap(), report);
    let wrong = json.replace("friendlab-report/1", "friendlab-report/0");
    assert!(Report::from_json(&wrong).is_err());
}

#[test]
fn markdown_numbers_match_json() {
    for cmd in ["predict", "feasibility"] {
        let json = friendlab(&[cmd, "--scenario", "ormrod-barrett"]);
        let md = friendlab(&[cmd, "--scenario", "ormrod-barrett", "--format", "md"]);
        assert_eq!(md.code, EXIT_OK);
        let mut value = Report::from_json(&json.stdout).unwrap().without_timings().to_value().unwrap();
        value["config"]["run"]["format"] = "md".into();
        let rows = parse_markdown_rows(&md.stdout);
        assert!(rows.len() > 20);
        for (path, v) in rows {
            if path.starts_with("/timings") {
                continue;
            }
            assert_eq!(value.pointer(&path), Some(&v), "{cmd} {path}");
        }
    }
}

#[test]
fn predict_examples() {
    let bong = Report::from_json(&friendlab(&["predict", "--scenario", "bong"]).stdout).unwrap();
    let p = bong.sections.predictions.unwrap();
    assert!((p.chsh.unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    assert_eq!(p.contexts.len(), 4);

    let lawrence = Report::from_json(&friendlab(&["predict", "--scenario", "lawrence"]).stdout).unwrap();
    let parities = lawrence.sections.predictions.unwrap().parities.unwrap();
    for (got, want) in parities.iter().zip([1.0, -1.0, -1.0, -1.0]) {
        assert!((got - want).abs() < 1e-9, "{parities:?}");
    }

    let dir = TempDir::new().unwrap();
    let eigen = write(
        &dir,
        "eigen.toml",
        "[scenario]\nkind = \"wigner\"\nstate = \"zero\"\n[scenario.angles]\nfriend = 0.0\nsuper = 0.0\n",
    );
    let out = friendlab(&["predict", "--config", &eigen]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let p = Report::from_json(&out.stdout).unwrap().sections.predictions.unwrap();
    for c in &p.contexts {
        let top = c.distribution.probabilities().iter().cloned().fold(0.0, f64::max);
        assert!((top - 1.0).abs() < 1e-12, "{} {top}", c.name);
    }
}

#[test]
fn feasibility_examples() {
    let f = |k: &str| {
        Report::from_json(&friendlab(&["feasibility", "--scenario", k]).stdout)
            .unwrap()
            .sections
            .feasibility
            .unwrap()
    };
    let bong = f("bong");
    assert!(bong.contradiction && bong.lp.unwrap().farkas.is_some());
    let lawrence = f("lawrence");
    assert!(lawrence.contradiction && lawrence.parity.unwrap().assignments.is_empty());
    let ob = f("ormrod-barrett");
    assert!(ob.contradiction && ob.possibilistic.unwrap().contradiction);
    assert!(!f("wigner").contradiction);

    let dir = TempDir::new().unwrap();
    let equal = write(
        &dir,
        "equal.toml",
        "[scenario]\nkind = \"bong\"\n[scenario.angles]\na = 0.4\nb = 0.4\nc = 0.4\nd = 0.4\n",
    );
    let out = friendlab(&["feasibility", "--config", &equal, "--format", "md"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("\"feasible\""), "{}", out.stdout);
}

#[test]
fn simulate_writes_batches_and_a_summary() {
    let dir = TempDir::new().unwrap();
    let out = friendlab(&[
        "simulate",
        "--scenario",
        "bong",
        "--model",
        "kent",
        "--model",
        "naive-absolute",
        "--samples",
        "20000",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert_eq!(Report::from_json(&summary).unwrap().without_timings(), Report::from_json(&out.stdout).unwrap().without_timings());
    let sim = Report::from_json(&summary).unwrap().sections.simulation.unwrap();
    assert_eq!(sim.batches.len(), 8);
    for b in &sim.batches {
        let lines = std::fs::read_to_string(dir.path().join(&b.file)).unwrap().lines().count();
        assert_eq!(lines, b.records);
        if b.model == "kent" && b.context == "super-super" {
            assert!(b.null_fraction.values().any(|&f| f == 1.0), "{:?}", b.null_fraction);
        }
    }
    let naive_gap = sim
        .batches
        .iter()
        .filter(|b| b.model == "naive-absolute")
        .map(|b| b.fpu_delta)
        .fold(0.0, f64::max);
    assert!(naive_gap >= 0.15, "{naive_gap}");
}
