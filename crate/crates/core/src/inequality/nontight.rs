//! A non-tight entropy bound for Φ ≥ 0 with Φ(0) = 0 and x·∇Φ ≤ (A+1)Φ:
//! for ∫e^g dμ_Φ = 1,
//!
//! Ent(e^g) ≤ 4α ∫ Φ*(∇g/α) e^g dμ + 1/2,
//!
//! where λ satisfies log ∫e^{Φ/λ} dμ ≤ 1 and α satisfies
//! (α + A|ψ(α) − 1|)·λ ≤ 1/2 with ψ(α) = sup (1−α)Φ*(x/(1−α)) / Φ*(x).

use serde::Serialize;

use crate::conjugate::{conjugate_value, grad_inverse};
use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::measure::{entropy_values, log_integral_exp, log_mean_exp_values, Measure};
use crate::potential::Potential;
use crate::report::{at_two_resolutions, VerificationReport};

use super::exp_weighted;

/// λ ladder: 1 + k·LAMBDA_STEP for k ≥ 1, capped at LAMBDA_CAP.
pub const LAMBDA_STEP: f64 = 1e-5;
pub const LAMBDA_CAP: f64 = 100.0;
/// α ladder: ALPHA_STEP, 2·ALPHA_STEP, …, 0.99.
pub const ALPHA_STEP: f64 = 0.01;
/// Points closer to the origin than this are left out of the ψ probe.
pub const PSI_EXCLUSION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NontightConstants {
    pub alpha: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub a: f64,
    /// ψ at α = 0.2, 0.1, 0.05.
    pub psi_limit: Vec<(f64, f64)>,
}

fn psi_probe(dim: usize) -> Vec<Vec<f64>> {
    let per_axis: usize = if dim == 1 { 401 } else { 81 };
    let node = |k: usize| -10.0 + 20.0 * k as f64 / (per_axis - 1) as f64;
    (0..per_axis.pow(dim as u32))
        .map(|idx| (0..dim).map(|d| node((idx / per_axis.pow(d as u32)) % per_axis)).collect::<Vec<f64>>())
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() >= PSI_EXCLUSION)
        .collect()
}

/// ψ(α) over the probe grid, for the unshifted potential.
pub fn psi(phi: &Potential, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("α must lie in (0, 1), got {alpha}")));
    }
    let phi = phi.clone().with_shift(0.0);
    let t = 1.0 - alpha;
    let mut best = f64::NEG_INFINITY;
    for x in psi_probe(phi.dim()) {
        let den = conjugate_value(&phi, &x)?;
        let num = t * conjugate_value(&phi, &x.iter().map(|v| v / t).collect::<Vec<_>>())?;
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    Ok(best)
}

fn check_hypotheses(phi: &Potential, a: f64) -> Result<()> {
    let dim = phi.dim();
    let origin = vec![0.0; dim];
    let at0 = phi.value(&origin);
    if at0.abs() > 1e-12 {
        return Err(Error::Hypothesis(format!("Φ(0) = {at0}, expected 0")));
    }
    for x in psi_probe(dim) {
        let v = phi.value(&x);
        if v < -1e-12 {
            return Err(Error::Hypothesis(format!("Φ({x:?}) = {v} is negative")));
        }
        let xd: f64 = x.iter().zip(phi.grad(&x)).map(|(p, q)| p * q).sum();
        if xd > (a + 1.0) * v + 1e-9 * (1.0 + v.abs()) {
            return Err(Error::Hypothesis(format!("x·∇Φ > (A+1)Φ at {x:?}")));
        }
    }
    Ok(())
}

/// log ∫e^{Φ/λ} dμ_Φ, +∞ for λ ≤ 1.
fn log_exp_moment(phi: &Potential, center: &[f64], log_z: f64, lambda: f64, accuracy: f64) -> Result<f64> {
    if lambda <= 1.0 {
        return Ok(f64::INFINITY);
    }
    let k = 1.0 - 1.0 / lambda;
    Ok(log_integral_exp(center, |x| -k * phi.value(x), accuracy)?.log_value - log_z)
}

pub fn nontight_constants(measure: &Measure, a: f64) -> Result<NontightConstants> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("A must be positive, got {a}")));
    }
    let phi = measure.potential().clone().with_shift(0.0);
    check_hypotheses(&phi, a)?;
    let accuracy = measure.accuracy();
    let center = grad_inverse(&phi, &vec![0.0; phi.dim()])?;
    let log_z = log_integral_exp(&center, |x| -phi.value(x), accuracy)?.log_value;

    let mut psi_limit = Vec::new();
    for al in [0.2, 0.1, 0.05] {
        psi_limit.push((al, psi(&phi, al)?));
    }
    let gaps: Vec<f64> = psi_limit.iter().map(|(_, p)| (p - 1.0).abs()).collect();
    if !(gaps[2] <= gaps[1] && gaps[1] <= gaps[0]) || gaps[2] > 0.5 {
        return Err(Error::Hypothesis(format!("ψ(α) does not approach 1: {psi_limit:?}")));
    }

    // smallest ladder λ with log ∫e^{Φ/λ} dμ ≤ 1; the moment decreases in λ
    let feasible = |k: u64| -> Result<bool> {
        Ok(log_exp_moment(&phi, &center, log_z, 1.0 + k as f64 * LAMBDA_STEP, accuracy)? <= 1.0)
    };
    let k_max = ((LAMBDA_CAP - 1.0) / LAMBDA_STEP).round() as u64;
    if !feasible(k_max)? {
        return Err(Error::Hypothesis(format!("no feasible λ up to {LAMBDA_CAP}")));
    }
    let (mut lo, mut hi) = (0u64, k_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 1.0 + hi as f64 * LAMBDA_STEP;

    let mut alpha = None;
    for j in (1..=99).rev() {
        let al = j as f64 * ALPHA_STEP;
        if (al + a * (psi(&phi, al)? - 1.0).abs()) * lambda <= 0.5 {
            alpha = Some(al);
            break;
        }
    }
    let alpha = alpha.ok_or_else(|| Error::Hypothesis(format!("no feasible α for λ = {lambda}")))?;
    Ok(NontightConstants {
        alpha,
        lambda,
        c1: 4.0 * alpha,
        c2: 1.0 / alpha,
        c3: 0.5,
        a,
        psi_limit,
    })
}

fn sides(measure: &Measure, phi: &Potential, k: &NontightConstants, g: &dyn SmoothFn) -> Result<(f64, f64)> {
    let gv = measure.map_nodes(|x| g.value(x));
    let l = log_mean_exp_values(measure.masses(), &gv)?;
    let gs: Vec<f64> = gv.iter().map(|v| v - l).collect();
    let lhs = entropy_values(measure.masses(), &gs)?;
    let cost = measure.try_map_nodes(|x| {
        let y: Vec<f64> = g.grad(x).iter().map(|v| k.c2 * v).collect();
        conjugate_value(phi, &y)
    })?;
    Ok((lhs, k.c1 * exp_weighted(measure.masses(), &gs, &cost)? + k.c3))
}

/// g is shifted so that ∫e^g dμ = 1 before both sides are evaluated.
pub fn verify_nontight(measure: &Measure, g: &dyn SmoothFn, constants: &NontightConstants) -> Result<VerificationReport> {
    let phi = measure.potential().clone().with_shift(0.0);
    let (c, f) = at_two_resolutions(measure, |m| sides(m, &phi, constants, g))?;
    Ok(VerificationReport::two_resolution("nontight", c, f)
        .with_meta("alpha", constants.alpha)
        .with_meta("lambda", constants.lambda)
        .with_meta("C1", constants.c1)
        .with_meta("C2", constants.c2)
        .with_meta("C3", constants.c3))
}
