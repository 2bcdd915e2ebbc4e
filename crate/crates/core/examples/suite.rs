//! A full verifier suite from a JSON config, written to a directory and
//! read back.

use convexlab::suite::{emit_report, load_report, run_suite, ExperimentConfig};

const CONFIG: &str = r#"{
  "schema": 1,
  "potential": {"kind": "polynomial", "coeffs": [0, 0, 0.5, 0, 0.08333333333333333]},
  "test_functions": {"count": 4, "seed": 2024},
  "verifiers": ["mlsi", "brascamp_lieb", "hphi", "power_lsi", "transport", "prekopa_leindler"]
}"#;

fn main() -> convexlab::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let report = run_suite(&cfg)?;
    print!("{}", report.summary_table());
    let dir = std::env::temp_dir().join("convexlab-suite-example");
    let files = emit_report(&report, &dir)?;
    println!("wrote {files:?} to {}", dir.display());
    let back = load_report(&dir)?;
    println!("reloaded {} reports, identical: {}", back.summary.total, back.reports == report.reports);
    Ok(())
}
