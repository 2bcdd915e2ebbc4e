//! Concentration for product measures μ^{⊗n} and functionals F with
//! ‖∂ᵢF‖_∞ ≤ 1:
//!
//! μ^{⊗n}(|F − μ^{⊗n}(F)| ≥ t) ≤ 2exp(−nC₁Φ(C₂t/n))  if t > nC₃,
//!                               2exp(−C₁t²/n)       otherwise,
//!
//! checked by Monte Carlo with Wilson upper bounds on the empirical tails.
//!
//! The constants come from a Herbst argument on the H_φ inequality: with
//! H̄(s) = sup_{|u|≤s} H_φ(u) and Λ(τ) = τ∫₀^τ H̄(s)/s² ds, the tail is at
//! most 2exp(−nΛ*(t/n)). [`calibrate_constants`] picks (C₁, C₂, C₃) under Λ*.
//! The recipe is implementation-defined; every bound records it in `meta`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conjugate::conjugate_value;
use crate::error::{Error, Result};
use crate::inequality::HPhiProfile;
use crate::measure::Measure;
use crate::potential::Potential;
use crate::report::VerificationReport;

/// Smallest sample count accepted by [`run_concentration`].
pub const MIN_SAMPLES: usize = 10_000;
/// Two-sided 95% normal quantile for the Wilson interval.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;
/// Quadratic-branch inflation in the calibration recipe.
pub const C1_INFLATION: f64 = 4.0;
/// Upper end of the τ grid for Λ and of the u grid (as a multiple of C₃).
const TAU_MAX: f64 = 1e16;
const U_SPAN: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Gaussian,
    Potential,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Gaussian => "gaussian",
            Regime::Potential => "potential",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConcentrationBound {
    pub c1: f64,
    pub c2: f64,
    /// +∞ when only the Gaussian branch is used.
    pub c3: f64,
    /// Φ with Φ(0) = 0.
    pub potential: Potential,
    pub meta: BTreeMap<String, Value>,
}

impl ConcentrationBound {
    pub fn regime(&self, lambda: f64, n: usize) -> Regime {
        if lambda > n as f64 * self.c3 {
            Regime::Potential
        } else {
            Regime::Gaussian
        }
    }

    /// Tail bound at level λ for n coordinates, capped at 2.
    pub fn evaluate(&self, lambda: f64, n: usize) -> f64 {
        let nf = n as f64;
        let exponent = match self.regime(lambda, n) {
            Regime::Potential => nf * self.c1 * self.potential.value(&[self.c2 * lambda / nf]),
            Regime::Gaussian => self.c1 * lambda * lambda / nf,
        };
        (2.0 * (-exponent.max(0.0)).exp()).min(2.0)
    }

    /// Gross-Herbst bound 2exp(−λt²/(2n)) for a potential with Hess φ ≥ λ.
    pub fn from_gross(potential: &Potential, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("convexity modulus must be positive, got {lambda}")));
        }
        let mut meta = BTreeMap::new();
        meta.insert("recipe".into(), json!("gross-herbst"));
        meta.insert("lambda".into(), json!(lambda));
        meta.insert("implementation_defined".into(), json!(true));
        Ok(Self {
            c1: 0.5 * lambda,
            c2: 1.0,
            c3: f64::INFINITY,
            potential: potential.centered(),
            meta,
        })
    }
}

/// Λ on a geometric τ grid from C_H to TAU_MAX, as an upper sum so that the
/// resulting Λ* is a lower bound.
fn lambda_transform(profile: &HPhiProfile) -> Result<Vec<(f64, f64)>> {
    let (lam, ch) = (profile.lambda, profile.c_h);
    let steps = 4000;
    let ratio = (TAU_MAX / ch).powf(1.0 / steps as f64);
    let mut out = Vec::with_capacity(steps + 1);
    let mut hbar = ch * ch / (2.0 * lam);
    let mut integral = ch / (2.0 * lam);
    let mut s = ch;
    out.push((s, s * integral));
    for _ in 0..steps {
        let next = s * ratio;
        let tail = profile.tail_coeff * conjugate_value(&profile.potential, &[0.5 * next])?;
        hbar = hbar.max(tail);
        integral += hbar * (1.0 / s - 1.0 / next);
        s = next;
        out.push((s, s * integral));
    }
    Ok(out)
}

/// Lower bound on Λ*(u) = sup_τ (τu − Λ(τ)).
fn legendre_lower(lam: f64, ch: f64, table: &[(f64, f64)], u: f64) -> f64 {
    let tau_q = (lam * u).min(ch);
    let quad = tau_q * u - tau_q * tau_q / (2.0 * lam);
    table.iter().fold(quad, |m, &(t, l)| m.max(t * u - l))
}

/// (C₁, C₂, C₃) from an H_φ profile and the growth constant B.
///
/// C₁ = λ/(2·4). Below u₀ = C_H/λ the quadratic part of Λ* dominates C₁u².
/// C₂ is the largest 2^{−k/8} with C₁Φ(C₂u) ≤ Λ*(u) on a log grid
/// u ∈ [u₀, 1000u₀]. C₃ is the smallest u₀·2^{j/8} with Φ(C₂C₃) ≥ C₃²,
/// which keeps the bound non-increasing across the switch, and with
/// C₁u² ≤ Λ*(u) on [u₀, C₃] so the Gaussian branch stays valid up to nC₃.
pub fn calibrate_constants(profile: &HPhiProfile, b: Option<f64>) -> Result<ConcentrationBound> {
    let b = b.ok_or_else(|| Error::Hypothesis("growth_B absent".into()))?;
    if !(b > 1.0) {
        return Err(Error::InvalidArgument(format!("B must exceed 1, got {b}")));
    }
    let lam = profile.lambda;
    let c1 = lam / (2.0 * C1_INFLATION);
    let u0 = profile.c_h / lam;
    let table = lambda_transform(profile)?;
    let lower = |u: f64| legendre_lower(lam, profile.c_h, &table, u);
    let us: Vec<f64> = (0..=200).map(|k| u0 * U_SPAN.powf(k as f64 / 200.0)).collect();
    let lows: Vec<f64> = us.iter().map(|&u| lower(u)).collect();
    let phi = &profile.potential;
    let c2 = (0..=400)
        .map(|k| 2f64.powf(-(k as f64) / 8.0))
        .find(|&cand| us.iter().zip(&lows).all(|(&u, &l)| c1 * phi.value(&[cand * u]) <= l))
        .ok_or_else(|| Error::Fit("no C2 on the ladder satisfies the calibration".into()))?;
    let mut c3 = None;
    for j in 0..=8 * 10 {
        let cand = u0 * 2f64.powf(j as f64 / 8.0);
        if cand > u0 * U_SPAN {
            break;
        }
        let quad_ok = us.iter().zip(&lows).take_while(|(u, _)| **u <= cand).all(|(&u, &l)| c1 * u * u <= l)
            && c1 * cand * cand <= lower(cand);
        if !quad_ok {
            break;
        }
        if phi.value(&[c2 * cand]) >= cand * cand {
            c3 = Some(cand);
            break;
        }
    }
    let c3 = c3.ok_or_else(|| Error::Fit("no C3 on the ladder satisfies the calibration".into()))?;
    let mut meta = BTreeMap::new();
    meta.insert("recipe".into(), json!("hphi-herbst"));
    meta.insert("implementation_defined".into(), json!(true));
    meta.insert("profile".into(), profile.meta());
    meta.insert("B".into(), json!(b));
    meta.insert("c1_inflation".into(), json!(C1_INFLATION));
    meta.insert("u0".into(), json!(u0));
    Ok(ConcentrationBound {
        c1,
        c2,
        c3,
        potential: profile.potential.clone(),
        meta,
    })
}

/// Functionals with coordinate-wise Lipschitz constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    Sum,
    /// τ·log Σ e^{xᵢ/τ}.
    SmoothMax { temperature: f64 },
}

impl Functional {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Functional::Sum => x.iter().sum(),
            Functional::SmoothMax { temperature: t } => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                m + t * x.iter().map(|v| ((v - m) / t).exp()).sum::<f64>().ln()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Sum => "sum".into(),
            Functional::SmoothMax { temperature } => format!("smooth_max({temperature})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationResult {
    pub lambda_grid: Vec<f64>,
    pub empirical_tail: Vec<f64>,
    pub wilson_upper: Vec<f64>,
    pub theoretical_bound: Vec<f64>,
    pub regime: Vec<Regime>,
    pub sample_count: usize,
    pub n: usize,
    pub seed: u64,
    pub center: f64,
}

impl ConcentrationResult {
    pub fn holds(&self) -> bool {
        self.wilson_upper.iter().zip(&self.theoretical_bound).all(|(w, b)| w <= b)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,empirical,wilson_upper,bound,regime\n");
        for k in 0..self.lambda_grid.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.lambda_grid[k],
                self.empirical_tail[k],
                self.wilson_upper[k],
                self.theoretical_bound[k],
                self.regime[k].as_str()
            ));
        }
        s
    }

    /// lhs = max_k wilson_k / bound_k against rhs = 1.
    pub fn to_report(&self, name: &str) -> VerificationReport {
        let ratio = self
            .wilson_upper
            .iter()
            .zip(&self.theoretical_bound)
            .map(|(w, b)| w / b)
            .fold(0.0, f64::max);
        VerificationReport::new(name, ratio, 1.0, 0.0)
            .with_meta("n", self.n)
            .with_meta("samples", self.sample_count)
            .with_meta("seed", self.seed)
            .with_meta("points", self.lambda_grid.len())
    }
}

/// Upper end of the Wilson score interval for k successes in m trials.
pub fn wilson_upper(k: usize, m: usize, z: f64) -> f64 {
    let (k, m) = (k as f64, m as f64);
    let p = k / m;
    let z2 = z * z;
    let center = p + z2 / (2.0 * m);
    let spread = z * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
    ((center + spread) / (1.0 + z2 / m)).min(1.0)
}

/// Grid 0, Δ, 2Δ, … up to the level where the bound falls to 1e−3, with Δ
/// the smallest of {0.25, 0.5, 1, 2, 5, 10, …} giving at most 50 points.
pub fn default_lambda_grid(bound: &ConcentrationBound, n: usize) -> Vec<f64> {
    let mut top = 1.0;
    while bound.evaluate(top, n) > 1e-3 && top < 1e9 {
        top *= 1.25;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bound.evaluate(mid, n) > 1e-3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut step = 0.25;
    let mut k = 0;
    while lo / step > 50.0 {
        step *= if k % 3 == 1 { 2.5 } else { 2.0 };
        k += 1;
    }
    (0..=(lo / step).floor() as usize).map(|i| i as f64 * step).collect()
}

fn check_lipschitz(f: &Functional, n: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11b5);
    for _ in 0..200 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let i = rng.random_range(0..n);
        let h: f64 = rng.random_range(-2.0..2.0);
        if h.abs() < 1e-6 {
            continue;
        }
        let mut y = x.clone();
        y[i] += h;
        let slope = (f.eval(&y) - f.eval(&x)).abs() / h.abs();
        if slope > 1.0 + 1e-9 {
            return Err(Error::Hypothesis(format!("coordinate increment {slope} exceeds 1 along axis {i}")));
        }
    }
    Ok(())
}

fn draw(measure: &Measure, n: usize, samples: usize, seed: u64, offset: u64) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .into_par_iter()
        .map(|i| measure.sample_1d_stream(samples, seed, 2 * i as u64 + offset))
        .collect()
}

fn values(f: &Functional, coords: &[Vec<f64>], samples: usize) -> Vec<f64> {
    (0..samples)
        .into_par_iter()
        .map(|j| {
            let row: Vec<f64> = coords.iter().map(|c| c[j]).collect();
            f.eval(&row)
        })
        .collect()
}

/// Monte Carlo tails of |F − E F| under μ^{⊗n}. Coordinate i draws from
/// stream 2i; the pilot sample used for centering draws from stream 2i + 1.
pub fn run_concentration(
    measure: &Measure,
    functional: &Functional,
    n: usize,
    bound: &ConcentrationBound,
    lambda_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConcentrationResult> {
    if measure.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: measure.dim() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) || lambda_grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::InvalidArgument("λ grid must be nonnegative and increasing".into()));
    }
    check_lipschitz(functional, n, seed)?;
    let pilot = values(functional, &draw(measure, n, samples, seed, 1)?, samples);
    let center = crate::quadrature::compensated_sum(pilot.iter().copied()) / samples as f64;
    let mut dev: Vec<f64> = values(functional, &draw(measure, n, samples, seed, 0)?, samples)
        .into_iter()
        .map(|v| (v - center).abs())
        .collect();
    dev.sort_by(f64::total_cmp);
    let mut empirical = Vec::with_capacity(lambda_grid.len());
    let mut upper = Vec::with_capacity(lambda_grid.len());
    for &l in lambda_grid {
        let count = samples - dev.partition_point(|&d| d < l);
        empirical.push(count as f64 / samples as f64);
        upper.push(wilson_upper(count, samples, WILSON_Z));
    }
    Ok(ConcentrationResult {
        lambda_grid: lambda_grid.to_vec(),
        empirical_tail: empirical,
        wilson_upper: upper,
        theoretical_bound: lambda_grid.iter().map(|&l| bound.evaluate(l, n)).collect(),
        regime: lambda_grid.iter().map(|&l| bound.regime(l, n)).collect(),
        sample_count: samples,
        n,
        seed,
        center,
    })
}
