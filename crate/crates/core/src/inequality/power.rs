//! Log-Sobolev inequality for power potentials Φ = ‖x‖^p/p, p ≥ 2:
//!
//! Ent_μ(e^g) ≤ c ∫ ‖∇g‖^q e^g dμ,   1/p + 1/q = 1,
//!
//! with c = sup_{z, ‖e‖=1} ψ̄(z, e) and
//! ψ̄(z, e) = z·e‖z‖^{q−2} − ‖z‖^q/q + ‖z − e‖^q/q.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conjugate::mlsi_bracket;
use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::measure::{entropy_values, Measure};
use crate::report::{at_two_resolutions, VerificationReport};

use super::exp_weighted;

const RANDOM_STARTS: usize = 32;
const START_SEED: u64 = 0x5eed;
const RADIAL_GRID: usize = 4000;
const ANGULAR_GRID: usize = 180;

/// ψ̄ as a function of r = ‖z‖ and c = cos∠(z, e).
fn psi_bar(q: f64, r: f64, c: f64) -> f64 {
    let d2 = (r * r - 2.0 * r * c + 1.0).max(0.0);
    r.powf(q - 1.0) * c - r.powf(q) / q + d2.powf(0.5 * q) / q
}

/// Minimal Nelder-Mead on a box, for polishing grid maxima in one or two variables.
fn nelder_mead_max(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, f64) {
    let n = start.len();
    let clamp = |x: &[f64]| -> Vec<f64> { (0..n).map(|i| x[i].clamp(lo[i], hi[i])).collect() };
    let obj = |x: &[f64]| -f(&clamp(x));
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), obj(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step[i];
        let v = obj(&p);
        simplex.push((p, v));
    }
    for _ in 0..400 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= 1e-15 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|p| p.0[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|i| centroid[i] + t * (simplex[n].0[i] - centroid[i])).collect() };
        let xr = along(-1.0);
        let fr = obj(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = obj(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(if fr < simplex[n].1 { -0.5 } else { 0.5 });
            let fc = obj(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n).map(|i| b[i] + 0.5 * (p.0[i] - b[i])).collect();
                    let v = obj(&x);
                    *p = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let x = clamp(&simplex[0].0);
    let v = f(&x);
    (x, v)
}

fn check_exponent(p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("power constant needs p >= 2, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// sup ψ̄ over ‖z‖ ≤ `z_cap`: grid search, 32 seeded random starts and
/// Nelder-Mead polish. In dimension 1, e = 1 and z = ±r; in higher
/// dimensions only the angle between z and e matters.
pub fn power_lsi_constant_capped(p: f64, dim: usize, z_cap: f64) -> Result<f64> {
    let q = check_exponent(p)?;
    if dim == 0 || !(z_cap > 0.0) {
        return Err(Error::InvalidArgument("dimension and z_cap must be positive".into()));
    }
    let cosines: Vec<f64> = if dim == 1 {
        vec![1.0, -1.0]
    } else {
        (0..=ANGULAR_GRID).map(|j| (PI * j as f64 / ANGULAR_GRID as f64).cos()).collect()
    };
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..=RADIAL_GRID {
        let t = k as f64 / RADIAL_GRID as f64;
        let r = z_cap * t * t;
        for (j, &c) in cosines.iter().enumerate() {
            let theta = if dim == 1 { if c > 0.0 { 0.0 } else { PI } } else { PI * j as f64 / ANGULAR_GRID as f64 };
            seeds.push((psi_bar(q, r, c), r, theta));
        }
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    seeds.truncate(8);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    for _ in 0..RANDOM_STARTS {
        let r = z_cap * rng.random::<f64>();
        let theta = if dim == 1 {
            if rng.random::<bool>() { 0.0 } else { PI }
        } else {
            PI * rng.random::<f64>()
        };
        seeds.push((psi_bar(q, r, theta.cos()), r, theta));
    }
    let mut best = seeds.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.0));
    let rstep = (z_cap / RADIAL_GRID as f64).max(1e-6);
    for &(_, r, theta) in &seeds {
        let v = if dim == 1 {
            let c = theta.cos();
            let f = move |x: &[f64]| psi_bar(q, x[0], c);
            nelder_mead_max(&f, &[r], &[rstep], &[0.0], &[z_cap]).1
        } else {
            let f = move |x: &[f64]| psi_bar(q, x[0], x[1].cos());
            nelder_mead_max(&f, &[r, theta], &[rstep, 0.01], &[0.0, 0.0], &[z_cap, PI]).1
        };
        best = best.max(v);
    }
    Ok(best)
}

fn shell_max(q: f64, dim: usize, z_cap: f64) -> f64 {
    let cosines: Vec<f64> = if dim == 1 {
        vec![1.0, -1.0]
    } else {
        (0..=ANGULAR_GRID).map(|j| (PI * j as f64 / ANGULAR_GRID as f64).cos()).collect()
    };
    let mut m = f64::NEG_INFINITY;
    for k in 0..=1000 {
        let r = z_cap * (0.5 + 0.5 * k as f64 / 1000.0);
        for &c in &cosines {
            m = m.max(psi_bar(q, r, c));
        }
    }
    m
}

/// sup ψ̄ with the radius cap doubled from 4 until the outer shell
/// [cap/2, cap] falls 1e−9 below the running best, or the best stops moving.
pub fn power_lsi_constant(p: f64, dim: usize) -> Result<f64> {
    let q = check_exponent(p)?;
    let mut cap = 4.0;
    let mut best = power_lsi_constant_capped(p, dim, cap)?;
    loop {
        if shell_max(q, dim, cap) < best - 1e-9 {
            return Ok(best);
        }
        let next = power_lsi_constant_capped(p, dim, 2.0 * cap)?.max(best);
        cap *= 2.0;
        if (next - best).abs() <= 1e-12 && cap >= 16.0 {
            return Ok(next);
        }
        best = next;
        if cap > 1e6 {
            return Err(Error::Optimizer(format!("ψ̄ still growing at radius {cap}")));
        }
    }
}

struct PowerSides {
    lhs: f64,
    rhs: f64,
    mlsi_rhs: f64,
    max_excess: f64,
}

fn sides(measure: &Measure, q: f64, c: f64, g: &dyn SmoothFn) -> Result<PowerSides> {
    let gv = measure.map_nodes(|x| g.value(x));
    let lhs = entropy_values(measure.masses(), &gv)?;
    let pot = measure.potential();
    let cost = measure.map_nodes(|x| c * g.grad(x).iter().map(|v| v * v).sum::<f64>().powf(0.5 * q));
    let br = measure.try_map_nodes(|x| mlsi_bracket(pot, x, &g.grad(x)))?;
    let max_excess = br
        .iter()
        .zip(&cost)
        .map(|(b, k)| b - k)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerSides {
        lhs,
        rhs: exp_weighted(measure.masses(), &gv, &cost)?,
        mlsi_rhs: exp_weighted(measure.masses(), &gv, &br)?,
        max_excess,
    })
}

/// `measure` must be built from ‖x‖^p/p (the Gaussian for p = 2).
pub fn verify_power_lsi(measure: &Measure, p: f64, g: &dyn SmoothFn) -> Result<VerificationReport> {
    let c = power_lsi_constant(p, measure.dim())?;
    verify_power_lsi_with_constant(measure, p, c, g)
}

/// As [`verify_power_lsi`] with a precomputed constant.
pub fn verify_power_lsi_with_constant(measure: &Measure, p: f64, c: f64, g: &dyn SmoothFn) -> Result<VerificationReport> {
    let q = check_exponent(p)?;
    match measure.potential().power_exponent() {
        Some(e) if (e - p).abs() <= 1e-12 => {}
        other => {
            return Err(Error::Hypothesis(format!(
                "measure potential is not ‖x‖^p/p with p={p} (exponent {other:?})"
            )))
        }
    }
    let (co, fi) = at_two_resolutions(measure, |m| sides(m, q, c, g))?;
    let dominated = fi.max_excess <= 1e-9 * (1.0 + fi.rhs.abs());
    Ok(
        VerificationReport::two_resolution("power_lsi", (co.lhs, co.rhs), (fi.lhs, fi.rhs))
            .with_meta("p", p)
            .with_meta("q", q)
            .with_meta("c", c)
            .with_meta("mlsi_rhs", fi.mlsi_rhs)
            .with_meta("pointwise_max_excess", fi.max_excess)
            .with_meta("mlsi_dominated", dominated),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{Constant, Linear, SineBump};
    use crate::measure::{build_measure, DEFAULT_ACCURACY};
    use crate::potential::Potential;
    use crate::report::Status;

    #[test]
    fn quadratic_constant_is_one_half() {
        for d in 1..=3 {
            let c = power_lsi_constant(2.0, d).unwrap();
            assert!((c - 0.5).abs() < 1e-8, "{d}: {c}");
        }
    }

    #[test]
    fn quartic_power_constant_is_stable() {
        let a = power_lsi_constant_capped(4.0, 1, 8.0).unwrap();
        let b = power_lsi_constant_capped(4.0, 1, 16.0).unwrap();
        assert!(a > 0.0 && (a - b).abs() < 1e-6);
        assert!(a >= 0.75 - 1e-12, "ψ̄(0, e) = 1/q = 0.75, got {a}");
        // the 1D sup over z ∈ ℝ by a dense scan
        let q = 4.0 / 3.0;
        let scan = (0..=400_000)
            .map(|k| -8.0 + k as f64 * 4e-5)
            .map(|z: f64| z * z.abs().powf(q - 2.0) - z.abs().powf(q) / q + (z - 1.0).abs().powf(q) / q)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((a - scan).abs() < 1e-7, "{a} vs {scan}");
        assert!(power_lsi_constant(1.5, 1).is_err());
    }

    #[test]
    fn gaussian_case_is_gross() {
        let m = build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY).unwrap();
        let r = verify_power_lsi(&m, 2.0, &Linear::scalar(0.7)).unwrap();
        assert_eq!(r.status, Status::Equality);
        let r = verify_power_lsi(&m, 2.0, &Constant::new(1, 0.0)).unwrap();
        assert_eq!(r.status, Status::Equality);
    }

    #[test]
    fn quartic_power_holds() {
        let m = build_measure(&Potential::power(1, 4.0).unwrap(), DEFAULT_ACCURACY).unwrap();
        let r = verify_power_lsi(&m, 4.0, &SineBump::new(1, 0.2, 1.0)).unwrap();
        assert_eq!(r.status, Status::Holds);
        assert!(r.margin > 0.0);
        assert_eq!(r.meta["mlsi_dominated"], true);
    }
}
