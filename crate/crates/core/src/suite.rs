//! Config-driven runs of the verifier suite and their on-disk reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concentration::{
    calibrate_constants, default_lambda_grid, run_concentration, ConcentrationBound, ConcentrationResult, Functional,
};
use crate::error::{Error, Result};
use crate::func::{Bump, FnField, PotentialProfile, Sine, SmoothFn, Sum};
use crate::grid::{GridFunction1D, GridSpec};
use crate::inequality::{
    check_prekopa_leindler, extract_hphi, nontight_constants, perturbed_measure, power_lsi_constant, prekopa_hull,
    verify_brascamp_lieb, verify_euclidean_lsi, verify_hphi_mlsi_with, verify_homogeneous_elsi, verify_mlsi,
    verify_nontight, verify_perturbed_on, verify_power_lsi_with_constant,
};
use crate::measure::{build_measure, Measure, DEFAULT_ACCURACY};
use crate::potential::{Potential, PotentialSpec};
use crate::regularity::{analyze_regularity, check_convexity, ProbeBox};
use crate::report::{Status, VerificationReport};
use crate::transport::{verify_transport, TransportInstance};

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_ACCURACY: f64 = 1e-12;
pub const MAX_ACCURACY: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierKind {
    Mlsi,
    BrascampLieb,
    PowerLsi,
    Hphi,
    Perturbed,
    Euclidean,
    Homogeneous,
    Nontight,
    PrekopaLeindler,
    Transport,
    Concentration,
}

impl VerifierKind {
    pub const ALL: [VerifierKind; 11] = [
        VerifierKind::Mlsi,
        VerifierKind::BrascampLieb,
        VerifierKind::PowerLsi,
        VerifierKind::Hphi,
        VerifierKind::Perturbed,
        VerifierKind::Euclidean,
        VerifierKind::Homogeneous,
        VerifierKind::Nontight,
        VerifierKind::PrekopaLeindler,
        VerifierKind::Transport,
        VerifierKind::Concentration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerifierKind::Mlsi => "mlsi",
            VerifierKind::BrascampLieb => "brascamp_lieb",
            VerifierKind::PowerLsi => "power_lsi",
            VerifierKind::Hphi => "hphi",
            VerifierKind::Perturbed => "perturbed",
            VerifierKind::Euclidean => "euclidean",
            VerifierKind::Homogeneous => "homogeneous",
            VerifierKind::Nontight => "nontight",
            VerifierKind::PrekopaLeindler => "prekopa_leindler",
            VerifierKind::Transport => "transport",
            VerifierKind::Concentration => "concentration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// a·exp(−‖x − c‖²/w²)
    Bump,
    /// a·(1 + β·(x₁ − c₁))·exp(−‖x − c‖²/w²) with β ∈ [−1, 1]
    PolyBump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Amplitudes are drawn uniformly from this range.
    #[serde(default = "default_amplitude")]
    pub amplitude: [f64; 2],
    #[serde(default = "default_width")]
    pub width: [f64; 2],
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

fn default_family() -> Family {
    Family::Bump
}
fn default_count() -> usize {
    10
}
fn default_amplitude() -> [f64; 2] {
    [-0.5, 0.5]
}
fn default_width() -> [f64; 2] {
    [0.3, 2.0]
}
fn default_center() -> [f64; 2] {
    [-2.0, 2.0]
}
fn default_accuracy() -> f64 {
    DEFAULT_ACCURACY
}

impl Default for TestFunctionSpec {
    fn default() -> Self {
        Self {
            family: default_family(),
            count: default_count(),
            amplitude: default_amplitude(),
            width: default_width(),
            center: default_center(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSpec {
    #[serde(default = "default_ns")]
    pub n: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_functional")]
    pub functional: Functional,
    /// Defaults to [`default_lambda_grid`] per n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
}

fn default_ns() -> Vec<usize> {
    vec![5, 10]
}
fn default_samples() -> usize {
    100_000
}
fn default_functional() -> Functional {
    Functional::Sum
}

impl Default for ConcentrationSpec {
    fn default() -> Self {
        Self {
            n: default_ns(),
            samples: default_samples(),
            seed: 0,
            functional: default_functional(),
            lambda_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub test_functions: TestFunctionSpec,
    pub verifiers: Vec<VerifierKind>,
    #[serde(default = "default_accuracy")]
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationSpec>,
}

impl ExperimentConfig {
    /// Parse and validate, reporting the offending field with line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!("field `{path}`: {inner}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.verifiers.is_empty() {
            return Err(Error::Config("verifier list is empty".into()));
        }
        if !(self.accuracy >= MIN_ACCURACY && self.accuracy <= MAX_ACCURACY) {
            return Err(Error::Config(format!(
                "accuracy {} outside [{MIN_ACCURACY:e}, {MAX_ACCURACY:e}]",
                self.accuracy
            )));
        }
        let t = &self.test_functions;
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ordered(t.amplitude) && ordered(t.width) && ordered(t.center)) || !(t.width[0] > 0.0) {
            return Err(Error::Config("test_functions ranges must be finite, ordered, with positive width".into()));
        }
        Ok(())
    }
}

/// A verifier that did not apply to the configured potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub verifier: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub holds: usize,
    pub equality: usize,
    pub violated: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    /// Reports per verifier, in test-function order.
    pub reports: BTreeMap<String, Vec<VerificationReport>>,
    pub skips: Vec<Skip>,
    pub summary: Summary,
    /// CSV sweeps keyed by file stem (concentration tails).
    #[serde(skip)]
    pub sweeps: BTreeMap<String, String>,
    /// Wall-clock seconds per verifier; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub timings: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn has_violations(&self) -> bool {
        self.summary.violated > 0
    }

    fn summarize(&mut self) {
        let mut s = Summary::default();
        for r in self.reports.values().flatten() {
            match r.status {
                Status::Holds => s.holds += 1,
                Status::Equality => s.equality += 1,
                Status::Violated | Status::ViolatedHypothesis => s.violated += 1,
            }
            s.total += 1;
        }
        self.summary = s;
    }

    /// Plain-text table, one row per verifier.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<18} {:>7} {:>9} {:>9} {:>9}", "verifier", "holds", "equality", "violated", "min_rel");
        for (name, rs) in &self.reports {
            let count = |st: &[Status]| rs.iter().filter(|r| st.contains(&r.status)).count();
            let min_rel = rs.iter().map(|r| r.rel_margin).fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                out,
                "{:<18} {:>7} {:>9} {:>9} {:>9.2e}",
                name,
                count(&[Status::Holds]),
                count(&[Status::Equality]),
                count(&[Status::Violated, Status::ViolatedHypothesis]),
                min_rel
            );
        }
        for s in &self.skips {
            let _ = writeln!(out, "{:<18} skipped: {}", s.verifier, s.reason);
        }
        let s = self.summary;
        let _ = writeln!(
            out,
            "total {} (holds {}, equality {}, violated {})",
            s.total, s.holds, s.equality, s.violated
        );
        out
    }
}

/// The seeded test functions of a config, in index order.
pub fn test_functions(spec: &TestFunctionSpec, dim: usize) -> Vec<Arc<dyn SmoothFn>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |r: [f64; 2]| if r[0] == r[1] { r[0] } else { rng.random_range(r[0]..r[1]) };
    (0..spec.count)
        .map(|_| {
            let a = draw(spec.amplitude);
            let w = draw(spec.width);
            let c: Vec<f64> = (0..dim).map(|_| draw(spec.center)).collect();
            let f: Arc<dyn SmoothFn> = match spec.family {
                Family::Bump => Arc::new(Bump::new(a, c, w)),
                Family::PolyBump => {
                    let beta = draw([-1.0, 1.0]);
                    let bump = Bump::new(a, c.clone(), w);
                    let bump2 = bump.clone();
                    let c2 = c.clone();
                    Arc::new(FnField::new(
                        dim,
                        move |x: &[f64]| (1.0 + beta * (x[0] - c[0])) * bump.value(x),
                        move |x: &[f64]| {
                            let p = 1.0 + beta * (x[0] - c2[0]);
                            let mut g: Vec<f64> = bump2.grad(x).iter().map(|v| p * v).collect();
                            g[0] += beta * bump2.value(x);
                            g
                        },
                    ))
                }
            };
            f
        })
        .collect()
}

fn skip(kind: VerifierKind, reason: impl Into<String>) -> Skip {
    Skip {
        verifier: kind.as_str().into(),
        reason: reason.into(),
    }
}

fn context(kind: VerifierKind, index: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Hypothesis(m) => Error::Hypothesis(m),
        other => Error::Optimizer(format!("{} on test function {index}: {other}", kind.as_str())),
    }
}

/// Run `f` on every test function in parallel, in index order.
fn per_function(
    kind: VerifierKind,
    gs: &[Arc<dyn SmoothFn>],
    f: impl Fn(&Arc<dyn SmoothFn>) -> Result<VerificationReport> + Sync,
) -> Result<Vec<VerificationReport>> {
    gs.par_iter()
        .enumerate()
        .map(|(i, g)| f(g).map_err(context(kind, i)))
        .collect()
}

enum Outcome {
    Reports(Vec<VerificationReport>),
    Skipped(String),
}

/// Skip on hypothesis failures, propagate everything else.
fn or_skip<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if e.is_hypothesis() => Ok(Err(match e {
            Error::Hypothesis(m) => m,
            other => other.to_string(),
        })),
        Err(e) => Err(e),
    }
}

macro_rules! applicable {
    ($e:expr) => {
        match or_skip($e)? {
            Ok(v) => v,
            Err(reason) => return Ok(Outcome::Skipped(reason)),
        }
    };
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    potential: &'a Potential,
    measure: &'a Measure,
    gs: &'a [Arc<dyn SmoothFn>],
    sweeps: BTreeMap<String, String>,
}

fn require_1d(p: &Potential, what: &str) -> Result<()> {
    if p.dim() != 1 {
        return Err(Error::Hypothesis(format!("{what} is one-dimensional")));
    }
    Ok(())
}

/// Test functions for Lebesgue-reference verifiers: −φ plus the bump.
fn lebesgue_functions(phi: &Potential, gs: &[Arc<dyn SmoothFn>]) -> Vec<Arc<dyn SmoothFn>> {
    gs.iter()
        .map(|g| {
            let base: Arc<dyn SmoothFn> = Arc::new(PotentialProfile::new(phi.clone(), vec![0.0; phi.dim()], 1.0, 0.0));
            Arc::new(Sum(vec![base, g.clone()])) as Arc<dyn SmoothFn>
        })
        .collect()
}

/// Calibrated constants for one-dimensional potentials with an H_φ profile,
/// otherwise the Gaussian-regime bound from the uniform convexity constant.
pub fn concentration_bound(potential: &Potential) -> Result<ConcentrationBound> {
    match extract_hphi(potential) {
        Ok(profile) => {
            let reg = analyze_regularity(&potential.centered(), &ProbeBox::symmetric(1, 10.0), 401)?;
            calibrate_constants(&profile, reg.growth_b)
        }
        Err(e) if e.is_hypothesis() => {
            let lambda = check_convexity(potential)?;
            if lambda > 0.0 {
                ConcentrationBound::from_gross(potential, lambda)
            } else {
                Err(e)
            }
        }
        Err(e) => Err(e),
    }
}

fn run_one(kind: VerifierKind, cx: &mut Context<'_>) -> Result<Outcome> {
    let (pot, m, gs) = (cx.potential, cx.measure, cx.gs);
    let acc = cx.config.accuracy;
    let reports = match kind {
        VerifierKind::Mlsi => per_function(kind, gs, |g| verify_mlsi(m, g))?,
        VerifierKind::BrascampLieb => {
            let lambda = check_convexity(pot)?;
            if !(lambda > 0.0) {
                return Ok(Outcome::Skipped(format!("Hessian not uniformly positive (lambda={lambda})")));
            }
            per_function(kind, gs, |g| verify_brascamp_lieb(m, g))?
        }
        VerifierKind::PowerLsi => {
            let p = applicable!(pot
                .power_exponent()
                .ok_or_else(|| Error::Hypothesis("potential is not of the form |x|^p/p".into())));
            let c = power_lsi_constant(p, pot.dim())?;
            per_function(kind, gs, |g| verify_power_lsi_with_constant(m, p, c, g))?
        }
        VerifierKind::Hphi => {
            let profile = applicable!(extract_hphi(pot));
            per_function(kind, gs, |g| verify_hphi_mlsi_with(m, &profile, g))?
        }
        VerifierKind::Perturbed => {
            let (base, u): (Potential, Arc<dyn SmoothFn>) = match pot.perturbation() {
                Some((b, u)) => (b.clone(), u.clone()),
                None => (pot.clone(), Arc::new(Sine::new(pot.dim(), 0.1, 1.0))),
            };
            let pm = applicable!(perturbed_measure(&base, u, acc));
            per_function(kind, gs, |g| verify_perturbed_on(&pm, g))?
        }
        VerifierKind::Euclidean => {
            let phi = m.potential().clone();
            let lg = lebesgue_functions(&phi, gs);
            per_function(kind, &lg, |g| verify_euclidean_lsi(&phi, g, 1.0))?
        }
        VerifierKind::Homogeneous => {
            let q = applicable!(pot
                .power_exponent()
                .ok_or_else(|| Error::Hypothesis("potential is not homogeneous".into())));
            let c = pot.clone().with_shift(0.0);
            let lg = lebesgue_functions(&c, gs);
            per_function(kind, &lg, |g| verify_homogeneous_elsi(&c, q, g))?
        }
        VerifierKind::Nontight => {
            let raw = pot.clone().with_shift(0.0);
            let box_ = ProbeBox::symmetric(pot.dim(), 10.0);
            let reg = analyze_regularity(&raw, &box_, if pot.dim() == 1 { 401 } else { 441 })?;
            let b = applicable!(reg
                .growth_b
                .ok_or_else(|| Error::Hypothesis("growth_B absent".into())));
            let k = applicable!(nontight_constants(m, b - 1.0));
            per_function(kind, gs, |g| verify_nontight(m, g, &k))?
        }
        VerifierKind::PrekopaLeindler => {
            applicable!(require_1d(pot, "prekopa_leindler"));
            let spec = GridSpec::new(-10.0, 10.0, 401)?;
            let phi = m.potential().clone();
            let shifted = |s: f64| GridFunction1D::from_fn(spec, |x| (-phi.value(&[x - s])).exp());
            per_function(kind, gs, |g| {
                // shifts from the test function: its value and slope at the origin
                let (s1, s2) = (g.value(&[0.0]).clamp(-2.0, 2.0), g.grad(&[0.0])[0].clamp(-2.0, 2.0));
                let (u, v) = (shifted(s1)?, shifted(s2)?);
                let w = prekopa_hull(&u, &v, 0.5)?;
                check_prekopa_leindler(&u, &v, &w, 0.5)
            })?
        }
        VerifierKind::Transport => {
            applicable!(require_1d(pot, "transport"));
            per_function(kind, gs, |g| {
                let g = g.clone();
                let inst = TransportInstance::new(m.clone(), Arc::new(move |x| g.value(&[x])))?;
                verify_transport(&inst)
            })?
        }
        VerifierKind::Concentration => {
            applicable!(require_1d(pot, "concentration"));
            let spec = cx.config.concentration.clone().unwrap_or_default();
            let bound = applicable!(concentration_bound(pot));
            let mut out = Vec::new();
            for &n in &spec.n {
                let grid = spec.lambda_grid.clone().unwrap_or_else(|| default_lambda_grid(&bound, n));
                let res = run_concentration(m, &spec.functional, n, &bound, &grid, spec.samples, spec.seed)?;
                cx.sweeps.insert(format!("concentration_n{n}"), res.to_csv());
                out.push(concentration_report(&res, &bound, &spec.functional));
            }
            out
        }
    };
    Ok(Outcome::Reports(reports))
}

fn concentration_report(res: &ConcentrationResult, bound: &ConcentrationBound, f: &Functional) -> VerificationReport {
    let mut r = res.to_report("concentration");
    r.set_meta("C1", bound.c1);
    r.set_meta("C2", bound.c2);
    r.set_meta("C3", if bound.c3.is_finite() { bound.c3.into() } else { serde_json::Value::Null });
    r.set_meta("functional", f.name());
    r.set_meta("constants", serde_json::to_value(&bound.meta).expect("meta serializes"));
    r
}

/// Run every configured verifier on the configured potential. Theorem
/// preconditions that fail become skips; numerical failures are errors.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteReport> {
    config.validate()?;
    let potential = Potential::from_spec(&config.potential)?;
    let measure = build_measure(&potential, config.accuracy)?;
    let gs = test_functions(&config.test_functions, potential.dim());
    let mut kinds = config.verifiers.clone();
    kinds.sort();
    kinds.dedup();
    let mut cx = Context {
        config,
        potential: &potential,
        measure: &measure,
        gs: &gs,
        sweeps: BTreeMap::new(),
    };
    let mut reports = BTreeMap::new();
    let mut skips = Vec::new();
    let mut timings = BTreeMap::new();
    for kind in kinds {
        let start = Instant::now();
        match run_one(kind, &mut cx)? {
            Outcome::Reports(rs) => {
                reports.insert(kind.as_str().to_string(), rs);
            }
            Outcome::Skipped(reason) => skips.push(skip(kind, reason)),
        }
        timings.insert(kind.as_str().to_string(), start.elapsed().as_secs_f64());
    }
    let mut suite = SuiteReport {
        schema: SCHEMA_VERSION,
        config: config.clone(),
        reports,
        skips,
        summary: Summary::default(),
        sweeps: cx.sweeps,
        timings,
    };
    suite.summarize();
    Ok(suite)
}

fn report_csv(reports: &[VerificationReport]) -> String {
    let mut s = String::from("index,name,lhs,rhs,margin,rel_margin,status,tolerance\n");
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{}",
            r.name, r.lhs, r.rhs, r.margin, r.rel_margin, r.status, r.tolerance
        );
    }
    s
}

fn write(dir: &Path, name: &str, body: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(name.to_string())
}

/// Write suite.json, one CSV per verifier, the concentration sweeps,
/// summary.txt and manifest.txt. Returns the file names written, in order.
pub fn emit_report(report: &SuiteReport, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Vec::new();
    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    manifest.push(write(dir, "suite.json", &json)?);
    for (name, rs) in &report.reports {
        manifest.push(write(dir, &format!("{name}.csv"), &report_csv(rs))?);
    }
    for (stem, csv) in &report.sweeps {
        manifest.push(write(dir, &format!("{stem}.csv"), csv)?);
    }
    manifest.push(write(dir, "summary.txt", &report.summary_table())?);
    manifest.push("manifest.txt".into());
    write(dir, "manifest.txt", &(manifest.join("\n") + "\n"))?;
    Ok(manifest)
}

/// Read a suite.json written by [`emit_report`].
pub fn load_report(dir: &Path) -> Result<SuiteReport> {
    let path = dir.join("suite.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
