//! Pointwise Legendre-Fenchel conjugation through the gradient bijection.
//!
//! For a strictly convex superlinear φ the supremum in
//! φ*(y) = sup_z { y·z − φ(z) } is attained at the unique z* with ∇φ(z*) = y,
//! so φ*(y) = y·z* − φ(z*). Gaussian and power potentials use their closed
//! forms; everything else goes through damped Newton on ∇φ(z) = y.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::{Potential, PotentialKind};

pub const NEWTON_RTOL: f64 = 1e-10;
pub const NEWTON_MAX_ITERS: usize = 100;
const BACKTRACK: f64 = 0.5;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateResult {
    /// φ*(y).
    pub value: f64,
    /// z* with ∇φ(z*) = y.
    pub argmax: Vec<f64>,
    pub newton_iters: usize,
    /// ‖∇φ(z*) − y‖.
    pub residual: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(potential: &Potential, z: &[f64], y: &[f64]) -> Vec<f64> {
    potential
        .grad(z)
        .into_iter()
        .zip(y)
        .map(|(g, yi)| g - yi)
        .collect()
}

/// Solve H d = −r, regularizing H when it is not positive definite.
pub(crate) fn newton_direction(h: DMatrix<f64>, r: &[f64]) -> Option<Vec<f64>> {
    let n = r.len();
    let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
    let scale = h.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut tau = 0.0;
    for _ in 0..12 {
        let m = &h + DMatrix::identity(n, n) * tau;
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        tau = if tau == 0.0 { 1e-10 * scale } else { tau * 100.0 };
    }
    None
}

/// (∇φ)⁻¹(y) by damped Newton with backtracking on ‖∇φ(z) − y‖².
pub fn grad_inverse(potential: &Potential, y: &[f64]) -> Result<Vec<f64>> {
    potential.check_dim(y)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("conjugate argument {y:?}")));
    }
    if let Some(z) = closed_form_inverse(potential, y) {
        return Ok(z);
    }
    newton_inverse(potential, y, &vec![0.0; y.len()]).map(|(z, _, _)| z)
}

fn closed_form_inverse(potential: &Potential, y: &[f64]) -> Option<Vec<f64>> {
    match potential.kind() {
        PotentialKind::Gaussian => Some(y.to_vec()),
        PotentialKind::Power { p } if *p > 1.0 => {
            let q = p / (p - 1.0);
            let r = norm(y);
            if r == 0.0 {
                return Some(vec![0.0; y.len()]);
            }
            let s = r.powf(q - 2.0);
            Some(y.iter().map(|v| v * s).collect())
        }
        _ => None,
    }
}

/// Newton from `start`; returns (z, iterations, residual norm).
pub(crate) fn newton_inverse(
    potential: &Potential,
    y: &[f64],
    start: &[f64],
) -> Result<(Vec<f64>, usize, f64)> {
    let tol = NEWTON_RTOL * (1.0 + norm(y));
    let mut z = start.to_vec();
    let mut r = residual(potential, &z, y);
    let mut rn = norm(&r);
    let mut iters = 0;
    let mut polished = false;
    while iters < NEWTON_MAX_ITERS {
        if rn <= tol {
            if polished || rn == 0.0 {
                break;
            }
            polished = true;
        }
        iters += 1;
        let Some(d) = newton_direction(potential.hess(&z), &r) else {
            break;
        };
        let merit = rn * rn;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let rt = residual(potential, &trial, y);
            let rtn = norm(&rt);
            if rtn.is_finite() && rtn * rtn <= (1.0 - 2.0 * ARMIJO * step) * merit {
                z = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            step *= BACKTRACK;
        }
        if !accepted {
            break;
        }
    }
    if rn <= tol {
        return Ok((z, iters, rn));
    }
    if y.len() == 1 {
        if let Some(out) = bisect_inverse_1d(potential, y[0], tol) {
            return Ok(out);
        }
    }
    Err(Error::NewtonFailed {
        iterations: iters,
        residual: rn,
    })
}

/// Safeguard for 1D: φ' is increasing, so bracket and bisect.
fn bisect_inverse_1d(potential: &Potential, y: f64, tol: f64) -> Option<(Vec<f64>, usize, f64)> {
    let f = |t: f64| potential.grad(&[t])[0] - y;
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut k = 0;
    while f(lo) > 0.0 {
        lo *= 2.0;
        k += 1;
        if k > 200 {
            return None;
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 400 {
            return None;
        }
    }
    let mut iters = 0;
    while iters < 200 {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= tol || mid == lo || mid == hi {
            return Some((vec![mid], iters, fm.abs()));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// φ*(y) with its maximizer.
pub fn conjugate_at(potential: &Potential, y: &[f64]) -> Result<ConjugateResult> {
    potential.check_dim(y)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("conjugate argument {y:?}")));
    }
    let shift = potential.shift();
    match potential.kind() {
        PotentialKind::Gaussian => {
            let z = y.to_vec();
            Ok(ConjugateResult {
                value: 0.5 * dot(y, y) - shift,
                argmax: z,
                newton_iters: 0,
                residual: 0.0,
            })
        }
        PotentialKind::Power { p } if *p > 1.0 => {
            let q = p / (p - 1.0);
            let z = closed_form_inverse(potential, y).expect("power closed form");
            let res = norm(&residual(potential, &z, y));
            Ok(ConjugateResult {
                value: norm(y).powf(q) / q - shift,
                argmax: z,
                newton_iters: 0,
                residual: res,
            })
        }
        _ => {
            let (z, iters, res) = newton_inverse(potential, y, &vec![0.0; y.len()])?;
            Ok(ConjugateResult {
                value: dot(y, &z) - potential.value(&z),
                argmax: z,
                newton_iters: iters,
                residual: res,
            })
        }
    }
}

/// φ*(y) only.
pub fn conjugate_value(potential: &Potential, y: &[f64]) -> Result<f64> {
    conjugate_at(potential, y).map(|r| r.value)
}

/// The MLSI integrand x·v − φ*(∇φ(x)) + φ*(∇φ(x) − v).
///
/// With z' the maximizer for ∇φ(x) − v this equals the Bregman divergence
/// φ(x) − φ(z') − ∇φ(z')·(x − z'), which is how it is evaluated: every term
/// is finite, the shift cancels and the result is nonnegative up to rounding.
pub fn mlsi_bracket(potential: &Potential, x: &[f64], v: &[f64]) -> Result<f64> {
    potential.check_dim(v)?;
    let gx = potential.grad(x);
    let y: Vec<f64> = gx.iter().zip(v).map(|(a, b)| a - b).collect();
    let zc = conjugate_at(potential, &y)?.argmax;
    let diff: Vec<f64> = x.iter().zip(&zc).map(|(a, b)| a - b).collect();
    Ok(potential.value(x) - potential.value(&zc) - dot(&y, &diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force sup over a uniform grid, refined once around the best node.
    fn brute_conjugate_1d(potential: &Potential, y: f64, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let n = ((hi - lo) / 1e-4) as usize;
        for i in 0..=n {
            let z = lo + (hi - lo) * i as f64 / n as f64;
            let v = y * z - potential.value(&[z]);
            if v > best.0 {
                best = (v, z);
            }
        }
        best
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        let g = Potential::gaussian(1);
        let r = conjugate_at(&g, &[3.0]).unwrap();
        assert_eq!(r.value, 4.5);
        assert_eq!(r.argmax, vec![3.0]);
    }

    #[test]
    fn power_closed_form() {
        // |y|^q/q with q = 3/2 at y = 4: 8/(3/2) = 16/3
        let p = Potential::power(1, 3.0).unwrap();
        let r = conjugate_at(&p, &[4.0]).unwrap();
        assert!((r.value - 16.0 / 3.0).abs() < 1e-12);
        assert!((r.argmax[0] - 2.0).abs() < 1e-12);
        assert!(r.residual < 1e-12);
        let (bv, _) = brute_conjugate_1d(&p, 4.0, -5.0, 5.0);
        assert!((bv - r.value).abs() < 1e-6);
    }

    #[test]
    fn quartic_conjugate_matches_brute_force() {
        let q = Potential::quartic();
        let r = conjugate_at(&q, &[4.0 / 3.0]).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-12);
        assert!((r.value - 0.75).abs() < 1e-12);
        let (bv, bz) = brute_conjugate_1d(&q, 4.0 / 3.0, -3.0, 3.0);
        assert!((bv - 0.75).abs() < 1e-7);
        assert!((bz - 1.0).abs() < 1e-3);
    }

    #[test]
    fn grad_inverse_examples() {
        assert_eq!(grad_inverse(&Potential::gaussian(1), &[0.7]).unwrap(), vec![0.7]);
        let z = grad_inverse(&Potential::quartic(), &[4.0 / 3.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
        let z = grad_inverse(&Potential::power(1, 3.0).unwrap(), &[4.0]).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-12);
        // same root through the polynomial route: φ' = x|x| is not polynomial, so use x³/3 form
        let cubic = Potential::polynomial(1, vec![0.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
        let z = grad_inverse(&cubic, &[8.0]).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn newton_handles_far_targets() {
        let q = Potential::quartic();
        for y in [-1e6, -37.0, 1e-9, 250.0, 1e6] {
            let r = conjugate_at(&q, &[y]).unwrap();
            assert!(r.residual <= NEWTON_RTOL * (1.0 + y.abs()), "y={y} res={}", r.residual);
            assert!(r.newton_iters <= NEWTON_MAX_ITERS);
        }
    }

    #[test]
    fn two_dimensional_newton() {
        let p = Potential::polynomial(2, vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0]).unwrap();
        let r = conjugate_at(&p, &[4.0 / 3.0, -4.0 / 3.0]).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-12);
        assert!((r.argmax[1] + 1.0).abs() < 1e-12);
        assert!((r.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn conjugate_errors() {
        let g = Potential::gaussian(2);
        assert!(matches!(
            conjugate_at(&g, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            grad_inverse(&Potential::quartic(), &[f64::INFINITY]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn shift_lowers_conjugate() {
        let g = Potential::gaussian(1).with_shift(0.9);
        assert!((conjugate_value(&g, &[2.0]).unwrap() - (2.0 - 0.9)).abs() < 1e-15);
        let q = Potential::quartic().with_shift(0.9);
        let v = conjugate_value(&q, &[4.0 / 3.0]).unwrap();
        assert!((v - (0.75 - 0.9)).abs() < 1e-12);
    }
}
