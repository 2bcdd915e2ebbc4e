//! The sup-convolution
//!
//! g_s(z) = sup { g(x) − tφ(x) − sφ(y) : tx + sy = z } + φ(z),  t = 1 − s,
//!
//! and a Richardson-type fit of its first-order expansion in s.

use crate::conjugate::{grad_inverse, mlsi_bracket, newton_direction};
use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::potential::Potential;

const STATIONARY_RTOL: f64 = 1e-13;
const MAX_ITERS: usize = 100;
const FALLBACK_POINTS: usize = 2001;

/// Default ladder for [`expansion_order`].
pub const S_LADDER: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];

#[derive(Debug, Clone, PartialEq)]
pub struct SupConvolution {
    /// g_s(z).
    pub value: f64,
    /// g_s(z) − g(z), computed without the cancellation of `value − g(z)`.
    pub gain: f64,
    /// Maximizing y (and x = (z − s·y)/t).
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Newton and the polished grid search both failed; `value` is the best
    /// point found and only a lower bound.
    pub degraded: bool,
}

struct Objective<'a> {
    g: &'a dyn SmoothFn,
    phi: &'a Potential,
    z: &'a [f64],
    s: f64,
    t: f64,
    gz: f64,
    phiz: f64,
}

impl Objective<'_> {
    fn x_of(&self, y: &[f64]) -> Vec<f64> {
        self.z.iter().zip(y).map(|(z, y)| (z - self.s * y) / self.t).collect()
    }

    /// J(y) + φ(z) − g(z), grouped as two O(s) differences.
    fn gain(&self, y: &[f64]) -> f64 {
        let x = self.x_of(y);
        (self.g.value(&x) - self.gz)
            - (self.t * self.phi.value(&x) + self.s * self.phi.value(y) - self.phiz)
    }

    /// ∇g(x) − t∇φ(x) + t∇φ(y), proportional to −∇J.
    fn stationarity(&self, y: &[f64]) -> Vec<f64> {
        let x = self.x_of(y);
        let gg = self.g.grad(&x);
        let px = self.phi.grad(&x);
        let py = self.phi.grad(y);
        (0..y.len()).map(|i| gg[i] - self.t * px[i] + self.t * py[i]).collect()
    }

    fn jacobian(&self, y: &[f64]) -> nalgebra::DMatrix<f64> {
        let x = self.x_of(y);
        let r = self.s / self.t;
        self.phi.hess(y) * self.t + self.phi.hess(&x) * self.s - self.g.hess(&x) * r
    }

    fn tolerance(&self, y: &[f64]) -> f64 {
        let scale: f64 = self.phi.grad(y).iter().map(|v| v * v).sum::<f64>().sqrt();
        STATIONARY_RTOL * (1.0 + scale)
    }

    /// Damped Newton ascent on J from `start`.
    fn newton(&self, start: Vec<f64>) -> Option<(Vec<f64>, usize)> {
        let mut y = start;
        let mut f = self.stationarity(&y);
        let mut val = self.gain(&y);
        for iter in 0..MAX_ITERS {
            let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !fnorm.is_finite() {
                return None;
            }
            if fnorm <= self.tolerance(&y) {
                return Some((y, iter));
            }
            let d = newton_direction(self.jacobian(&y), &f)?;
            // ∇J = −(s/t)·F, so the directional derivative is −(s/t)·F·d
            let slope = -(self.s / self.t) * f.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            // the ascent is O(s·|F|²) and drowns in rounding near the optimum;
            // there a step that shrinks |F| without losing gain is accepted
            let noise = 1e-14 * (1.0 + self.gz.abs() + self.phiz.abs());
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                let tv = self.gain(&trial);
                let armijo = tv >= val + 1e-4 * step * slope.max(0.0);
                let contracts = || {
                    tv >= val - noise
                        && self.stationarity(&trial).iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.5 * fnorm
                };
                if tv.is_finite() && (armijo || contracts()) {
                    y = trial;
                    val = tv;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                // no ascent possible in floating point; accept if nearly stationary
                let fnorm = self.stationarity(&y).iter().map(|v| v * v).sum::<f64>().sqrt();
                return (fnorm <= 1e3 * self.tolerance(&y)).then_some((y, iter));
            }
            f = self.stationarity(&y);
        }
        None
    }
}

/// g_s(z) for s ∈ (0, 1/2).
///
/// Newton starts from y₀ = (∇φ)⁻¹(∇φ(z) − ∇g(z)), the limiting maximizer as
/// s → 0. If it fails, a grid search over z + [−10, 10]·(1 + ‖z‖) per axis
/// picks a new start, and if that polish fails too the best grid point is
/// returned with `degraded` set.
pub fn sup_convolution(g: &dyn SmoothFn, potential: &Potential, s: f64, z: &[f64]) -> Result<SupConvolution> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidArgument(format!("s must lie in (0, 1/2), got {s}")));
    }
    potential.check_dim(z)?;
    if g.dim() != potential.dim() {
        return Err(Error::DimensionMismatch {
            expected: potential.dim(),
            got: g.dim(),
        });
    }
    let obj = Objective {
        g,
        phi: potential,
        z,
        s,
        t: 1.0 - s,
        gz: g.value(z),
        phiz: potential.value(z),
    };
    let finish = |y: Vec<f64>, iterations: usize, degraded: bool| {
        let gain = obj.gain(&y);
        SupConvolution {
            value: obj.gz + gain,
            gain,
            x: obj.x_of(&y),
            y,
            iterations,
            degraded,
        }
    };

    let target: Vec<f64> = potential
        .grad(z)
        .iter()
        .zip(g.grad(z))
        .map(|(a, b)| a - b)
        .collect();
    if let Ok(y0) = grad_inverse(potential, &target) {
        if let Some((y, it)) = obj.newton(y0) {
            return Ok(finish(y, it, false));
        }
    }

    let best = grid_search(&obj)?;
    match obj.newton(best.clone()) {
        Some((y, it)) if obj.gain(&y) >= obj.gain(&best) => Ok(finish(y, it, false)),
        _ => Ok(finish(best, 0, true)),
    }
}

fn grid_search(obj: &Objective<'_>) -> Result<Vec<f64>> {
    let dim = obj.z.len();
    let znorm = obj.z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let half = 10.0 * (1.0 + znorm);
    let per_axis = match dim {
        1 => FALLBACK_POINTS,
        _ => (FALLBACK_POINTS as f64).powf(1.0 / dim as f64).ceil() as usize,
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; dim];
    loop {
        let y: Vec<f64> = (0..dim)
            .map(|d| obj.z[d] - half + 2.0 * half * idx[d] as f64 / (per_axis - 1) as f64)
            .collect();
        let v = obj.gain(&y);
        if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, y));
        }
        let mut d = 0;
        loop {
            if d == dim {
                return best
                    .map(|(_, y)| y)
                    .ok_or_else(|| Error::Optimizer("objective is non-finite on the whole fallback grid".into()));
            }
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Fit of D(s) = (g_s(z) − g(z))/s ≈ m + β·s^κ.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    /// Extrapolated limit slope m = lim D(s).
    pub slope: f64,
    /// Residual order κ; `None` when D is constant on the ladder.
    pub order: Option<f64>,
    /// (s, D(s)) on the ladder.
    pub samples: Vec<(f64, f64)>,
    /// z·∇g(z) − φ*(∇φ(z)) + φ*(∇φ(z) − ∇g(z)).
    pub integrand: f64,
    pub degraded: bool,
}

impl ExpansionFit {
    /// |m − integrand| / max(|integrand|, 1e-300).
    pub fn relative_gap(&self) -> f64 {
        let scale = self.integrand.abs();
        if scale == 0.0 {
            (self.slope - self.integrand).abs()
        } else {
            (self.slope - self.integrand).abs() / scale
        }
    }
}

/// Extrapolate the s → 0 slope of g_s(z) − g(z) on a decreasing geometric ladder.
pub fn expansion_order(g: &dyn SmoothFn, potential: &Potential, z: &[f64], s_ladder: &[f64]) -> Result<ExpansionFit> {
    if s_ladder.len() < 3 {
        return Err(Error::InvalidArgument("s ladder needs at least three values".into()));
    }
    let ratio = s_ladder[0] / s_ladder[1];
    if !(ratio > 1.0)
        || s_ladder
            .windows(2)
            .any(|w| ((w[0] / w[1]) - ratio).abs() > 1e-9 * ratio)
    {
        return Err(Error::InvalidArgument(format!(
            "s ladder must be decreasing geometric, got {s_ladder:?}"
        )));
    }
    let mut samples = Vec::with_capacity(s_ladder.len());
    let mut degraded = false;
    for &s in s_ladder {
        let sc = sup_convolution(g, potential, s, z)?;
        degraded |= sc.degraded;
        samples.push((s, sc.gain / s));
    }
    let integrand = mlsi_bracket(potential, z, &g.grad(z))?;

    let d: Vec<f64> = samples.iter().map(|p| p.1).collect();
    let n = d.len();
    let deltas: Vec<f64> = d.windows(2).map(|w| w[0] - w[1]).collect();
    let scale = 1.0 + d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if deltas.iter().all(|v| v.abs() <= 1e-13 * scale) {
        return Ok(ExpansionFit {
            slope: d[n - 1],
            order: None,
            samples,
            integrand,
            degraded,
        });
    }
    let (a, b) = (deltas[n - 3], deltas[n - 2]);
    let same_sign = deltas.iter().all(|v| v.signum() == deltas[0].signum());
    if !same_sign || !(a.abs() > b.abs()) {
        return Err(Error::Fit(format!("D(s) is not monotone on the ladder: {d:?}")));
    }
    let kappa = (a / b).ln() / ratio.ln();
    let slope = d[n - 1] - b / (ratio.powf(kappa) - 1.0);
    Ok(ExpansionFit {
        slope,
        order: Some(kappa),
        samples,
        integrand,
        degraded,
    })
}
