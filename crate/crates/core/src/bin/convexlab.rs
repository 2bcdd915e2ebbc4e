//! Command-line front end: suite runs, single conjugates, Prékopa-Leindler
//! checks on CSV grids, concentration sweeps and report summaries.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use convexlab::conjugate::conjugate_at;
use convexlab::grid::GridFunction1D;
use convexlab::inequality::check_prekopa_leindler;
use convexlab::potential::{Potential, PotentialSpec};
use convexlab::suite::{emit_report, load_report, run_suite, ExperimentConfig, SuiteReport, VerifierKind};
use convexlab::Result;

const DEFAULT_OUT: &str = "convexlab-out";

#[derive(Parser)]
#[command(name = "convexlab", version, about = "Numerical checks of entropy and transport inequalities")]
struct Cli {
    /// Overrides the config accuracy.
    #[arg(long, global = true)]
    accuracy: Option<f64>,
    /// Overrides the test-function and sampling seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the config's output_dir, then ./convexlab-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verifier suite described by a JSON config.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate φ*(y) for one potential.
    Conjugate {
        /// JSON spec, or gaussian | quartic | power:P | poly:C0,C1,... with optional /DIM.
        #[arg(long)]
        potential: String,
        /// Comma-separated point.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Check a Prékopa-Leindler triple given as `x,value` CSV grids.
    Plcheck {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        a: f64,
    },
    /// Run only the concentration experiment of a config.
    Concentration {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the summary of a previously written suite.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(violated) => {
            if violated {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether any report was violated.
fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Verify { config } => {
            let cfg = load_config(&cli, config)?;
            suite(&cli, cfg)
        }
        Command::Concentration { config } => {
            let mut cfg = load_config(&cli, config)?;
            cfg.verifiers = vec![VerifierKind::Concentration];
            cfg.concentration.get_or_insert_with(Default::default);
            suite(&cli, cfg)
        }
        Command::Conjugate { potential, at } => {
            let spec = PotentialSpec::from_arg(potential)?;
            let pot = Potential::from_spec(&spec)?;
            let y = parse_point(at)?;
            let r = conjugate_at(&pot, &y)?;
            let out = json!({
                "potential": spec,
                "y": y,
                "value": r.value,
                "argmax": r.argmax,
                "newton_iters": r.newton_iters,
                "residual": r.residual,
            });
            emit(&(serde_json::to_string_pretty(&out).expect("json") + "\n"));
            Ok(false)
        }
        Command::Plcheck { u, v, w, a } => {
            let (u, v, w) = (
                GridFunction1D::read_csv(u)?,
                GridFunction1D::read_csv(v)?,
                GridFunction1D::read_csv(w)?,
            );
            let r = check_prekopa_leindler(&u, &v, &w, *a)?;
            emit(&(serde_json::to_string_pretty(&r).expect("json") + "\n"));
            Ok(r.status.is_violation())
        }
        Command::Report { dir } => {
            let report = load_report(dir)?;
            emit(&report.summary_table());
            Ok(report.has_violations())
        }
    }
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(acc) = cli.accuracy {
        cfg.accuracy = acc;
    }
    if let Some(seed) = cli.seed {
        cfg.test_functions.seed = seed;
        if let Some(c) = cfg.concentration.as_mut() {
            c.seed = seed;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn suite(cli: &Cli, cfg: ExperimentConfig) -> Result<bool> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let report: SuiteReport = run_suite(&cfg)?;
    let files = emit_report(&report, &dir)?;
    for (name, secs) in &report.timings {
        eprintln!("{name}: {secs:.2}s");
    }
    emit(&report.summary_table());
    emit(&format!("wrote {} files to {}\n", files.len(), dir.display()));
    Ok(report.has_violations())
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| convexlab::Error::InvalidArgument(format!("--at: {t:?} is not a number")))
        })
        .collect()
}

// a closed pipe (e.g. `| head`) is not an error worth a panic
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
