//! Suite runner, report emission and the command-line contract.

use std::path::Path;
use std::process::Command;

use convexlab::report::Status;
use convexlab::suite::{emit_report, load_report, run_suite, ExperimentConfig};
use convexlab::Error;

const BIN: &str = env!("CARGO_BIN_EXE_convexlab");

fn config(potential: &str, verifiers: &str, count: usize) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        r#"{{"schema": 1, "potential": {potential}, "test_functions": {{"count": {count}, "seed": 4}}, "verifiers": {verifiers}}}"#
    ))
    .unwrap()
}

#[test]
fn gaussian_bumps_under_two_verifiers() {
    let r = run_suite(&config(r#"{"kind": "gaussian"}"#, r#"["mlsi", "brascamp_lieb"]"#, 10)).unwrap();
    assert_eq!(r.summary.total, 20);
    assert_eq!(r.summary.violated, 0);
    assert_eq!(r.summary.holds + r.summary.equality + r.summary.violated, r.summary.total);
    assert_eq!(r.reports["mlsi"].len(), 10);
    assert!(r.skips.is_empty());
}

#[test]
fn hphi_on_gaussian_is_a_skip() {
    let r = run_suite(&config(r#"{"kind": "gaussian"}"#, r#"["hphi"]"#, 10)).unwrap();
    assert_eq!(r.summary.total, 0);
    assert_eq!(r.skips.len(), 1);
    assert_eq!(r.skips[0].verifier, "hphi");
    assert_eq!(r.skips[0].reason, "hess_unbounded=false");
}

#[test]
fn config_errors_name_the_field() {
    let empty = ExperimentConfig::parse(r#"{"schema": 1, "potential": {"kind": "gaussian"}, "verifiers": []}"#);
    assert!(matches!(empty, Err(Error::Config(ref m)) if m.contains("empty")), "{empty:?}");

    let typo = ExperimentConfig::parse("{\"schema\": 1,\n \"potential\": {\"kind\": \"gausian\"},\n \"verifiers\": [\"mlsi\"]}")
        .unwrap_err()
        .to_string();
    assert!(typo.contains("potential.kind") && typo.contains("line 2"), "{typo}");

    let bad_verifier = ExperimentConfig::parse(r#"{"schema": 1, "potential": {"kind": "gaussian"}, "verifiers": ["gross"]}"#)
        .unwrap_err()
        .to_string();
    assert!(bad_verifier.contains("verifiers[0]"), "{bad_verifier}");

    let acc = ExperimentConfig::parse(r#"{"schema": 1, "potential": {"kind": "gaussian"}, "verifiers": ["mlsi"], "accuracy": 1e-3}"#);
    assert!(acc.is_err());
    let schema = ExperimentConfig::parse(r#"{"schema": 2, "potential": {"kind": "gaussian"}, "verifiers": ["mlsi"]}"#);
    assert!(schema.is_err());
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn emitted_reports_are_byte_identical() {
    let cfg = config(r#"{"kind": "polynomial", "coeffs": [0, 0, 0.5, 0, 0.08333333333333333]}"#, r#"["mlsi", "hphi", "transport"]"#, 6);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = emit_report(&run_suite(&cfg).unwrap(), a.path()).unwrap();
    let mb = emit_report(&run_suite(&cfg).unwrap(), b.path()).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma, ["suite.json", "hphi.csv", "mlsi.csv", "transport.csv", "summary.txt", "manifest.txt"]);
    for name in &ma {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let back = load_report(a.path()).unwrap();
    assert_eq!(back.reports, run_suite(&cfg).unwrap().reports);
}

#[test]
fn unwritable_directory_reports_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("out");
    let r = run_suite(&config(r#"{"kind": "gaussian"}"#, r#"["mlsi"]"#, 1)).unwrap();
    let err = emit_report(&r, &target).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("blocker"), "{err}");
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn cli_verify_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, config(r#"{"kind": "gaussian"}"#, r#"["mlsi", "hphi"]"#, 3).to_json()).unwrap();
    let out = tmp.path().join("out");
    let (code, stdout, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("hess_unbounded=false"));
    let suite = load_report(&out).unwrap();
    assert_eq!(suite.config.test_functions.seed, 9);

    let (code, stdout, _) = run(&["report", "--dir", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("total 3"));

    // a violated report flips the exit code
    let mut broken = suite.clone();
    let r = &mut broken.reports.get_mut("mlsi").unwrap()[0];
    r.status = Status::Violated;
    broken.summary.violated = 1;
    let bad = tmp.path().join("bad");
    emit_report(&broken, &bad).unwrap();
    let (code, _, _) = run(&["report", "--dir", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn cli_rejects_bad_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"schema": 1, "potential": {"kind": "gaussian"}, "verifiers": []}"#).unwrap();
    let (code, _, stderr) = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("c.json") && stderr.contains("empty"), "{stderr}");
    let (code, _, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--accuracy", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn cli_conjugate() {
    let (code, stdout, _) = run(&["conjugate", "--potential", "quartic", "--at", "-1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.44613).abs() < 1e-4);
    let (code, stdout, _) = run(&["conjugate", "--potential", "gaussian/2", "--at", "1,2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    let (code, _, _) = run(&["conjugate", "--potential", "cubic", "--at", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn cli_plcheck_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, f: &dyn Fn(f64) -> f64| {
        let path = tmp.path().join(name);
        let mut s = String::from("x,value\n");
        for i in 0..=200 {
            let x = -5.0 + i as f64 * 0.05;
            s.push_str(&format!("{x},{}\n", f(x)));
        }
        std::fs::write(&path, s).unwrap();
        path.to_str().unwrap().to_string()
    };
    let g = write("g.csv", &|x| (-0.5 * x * x).exp());
    let half = write("half.csv", &|x| 0.5 * (-0.5 * x * x).exp());
    let (code, stdout, _) = run(&["plcheck", "--u", &g, "--v", &g, "--w", &g, "--a", "0.5"]);
    assert_eq!(code, 0, "{stdout}");
    let (code, stdout, _) = run(&["plcheck", "--u", &g, "--v", &g, "--w", &half, "--a", "0.5"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("violated-hypothesis") && stdout.contains("witness"));
}

#[test]
fn cli_concentration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "potential": {"kind": "gaussian"}, "verifiers": ["mlsi"],
            "concentration": {"n": [5], "samples": 20000, "seed": 1}}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let (code, stdout, _) = run(&["concentration", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let csv = std::fs::read_to_string(out.join("concentration_n5.csv")).unwrap();
    assert!(csv.starts_with("lambda,empirical,wilson_upper,bound,regime\n"));
    let suite = load_report(&out).unwrap();
    assert_eq!(suite.reports.keys().collect::<Vec<_>>(), ["concentration"]);
}
