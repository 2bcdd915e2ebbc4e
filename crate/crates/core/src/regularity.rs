//! Probe-grid analysis of a potential: convexity modulus, evenness, Hessian
//! growth, homogeneity and the growth constants consumed by the H_φ and
//! concentration results.

use serde::Serialize;

use crate::conjugate::grad_inverse;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{decay_radius, BoxRule, GaussLegendre};

/// Ladder searched for the growth constant A in A·φ(x) ≤ x·φ'(x).
pub const GROWTH_LADDER: [f64; 14] = [
    1.25, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0,
];

/// Radii of the Hessian-unboundedness probe.
pub const HESS_PROBE_RADII: [f64; 3] = [10.0, 20.0, 40.0];

/// Axis-aligned probe box. Must contain the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ProbeBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrabilityFlag {
    Pass,
    Fail,
    NotEvaluated,
}

/// Heuristic check of the moment/Hessian integrability hypothesis of the main
/// inequality: the integral for each R must stabilize when the box doubles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Integrability {
    pub flag: IntegrabilityFlag,
    /// (R, integral on the base box, integral on the doubled box)
    pub values: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityProfile {
    /// Infimum of the smallest Hessian eigenvalue over the probes.
    pub lambda: f64,
    pub is_even: bool,
    /// φ'' grows along the axes at radii 10, 20, 40 and exceeds 10λ.
    pub hess_unbounded: bool,
    /// 1D only: φ'' non-increasing on the negative probes, non-decreasing on
    /// the positive ones.
    pub hess_radially_monotone: bool,
    pub homogeneity_q: Option<f64>,
    pub growth_a: Option<f64>,
    /// Crossing radius for `growth_a` (0 when absent).
    pub c_a: f64,
    pub growth_b: Option<f64>,
    /// osc(U) over the probes for perturbed potentials.
    pub oscillation: Option<f64>,
    pub integrability: Integrability,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn probe_points(domain: &ProbeBox, count: usize) -> Vec<Vec<f64>> {
    let dim = domain.dim();
    let per_axis = if dim == 1 {
        count
    } else {
        ((count as f64).powf(1.0 / dim as f64).ceil() as usize).max(5)
    };
    let axis: Vec<Vec<f64>> = (0..dim)
        .map(|d| {
            (0..per_axis)
                .map(|k| domain.lo[d] + (domain.hi[d] - domain.lo[d]) * k as f64 / (per_axis - 1) as f64)
                .collect()
        })
        .collect();
    let mut pts = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        pts.push((0..dim).map(|d| axis[d][idx[d]]).collect());
        let mut d = dim;
        loop {
            if d == 0 {
                pts.push(vec![0.0; dim]);
                return pts;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Signed axis directions ±eᵢ with the distance to the box edge along each.
fn rays(domain: &ProbeBox) -> Vec<(Vec<f64>, f64)> {
    let dim = domain.dim();
    let mut out = Vec::new();
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[d] = sign;
            let edge = if sign > 0.0 { domain.hi[d] } else { -domain.lo[d] };
            if edge > 0.0 {
                out.push((e, edge));
            }
        }
    }
    out
}

fn scaled(e: &[f64], r: f64) -> Vec<f64> {
    e.iter().map(|v| v * r).collect()
}

fn min_eigenvalue(potential: &Potential, x: &[f64]) -> f64 {
    let h = potential.hess(x);
    if h.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    if h.nrows() == 1 {
        return h[(0, 0)];
    }
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn operator_norm(potential: &Potential, x: &[f64]) -> f64 {
    let h = potential.hess(x);
    if h.nrows() == 1 {
        return h[(0, 0)].abs();
    }
    h.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Strict convexity and the convexity modulus λ over the probe grid.
/// Isolated degenerate points (like the origin for ‖x‖⁴/4) are tolerated;
/// a negative, non-finite or repeatedly vanishing Hessian is not.
fn convexity_modulus(potential: &Potential, probes: &[Vec<f64>]) -> Result<f64> {
    let mut lambda = f64::INFINITY;
    let mut degenerate: Option<Vec<f64>> = None;
    for x in probes {
        let e = min_eigenvalue(potential, x);
        let scale = 1.0 + operator_norm(potential, x).min(1e300);
        if !e.is_finite() || e < -1e-12 * scale {
            return Err(Error::NotStrictlyConvex {
                point: x.clone(),
                min_eigenvalue: e,
            });
        }
        if e <= 1e-12 * scale {
            if let Some(first) = &degenerate {
                if first != x {
                    return Err(Error::NotStrictlyConvex {
                        point: x.clone(),
                        min_eigenvalue: e,
                    });
                }
            }
            degenerate = Some(x.clone());
        }
        lambda = lambda.min(e.max(0.0));
    }
    Ok(lambda)
}

fn superlinear(potential: &Potential) -> Result<()> {
    let dim = potential.dim();
    let origin = vec![0.0; dim];
    let f0 = potential.value(&origin);
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[d] = sign;
            let mut prev = f64::NEG_INFINITY;
            let mut r = 1.0;
            while r <= 1024.0 {
                let ratio = (potential.value(&scaled(&e, r)) - f0) / r;
                if !(ratio > prev) {
                    return Err(Error::NotSuperlinear { direction: e });
                }
                prev = ratio;
                r *= 2.0;
            }
        }
    }
    Ok(())
}

fn hessian_growth(potential: &Potential, lambda: f64) -> bool {
    let dim = potential.dim();
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[d] = sign;
            let vals: Vec<f64> = HESS_PROBE_RADII
                .iter()
                .map(|&r| min_eigenvalue(potential, &scaled(&e, r)))
                .collect();
            let increasing = vals.windows(2).all(|w| w[1] > w[0]);
            let large = vals.iter().all(|v| *v > 10.0 * lambda);
            if !(increasing && large) {
                return false;
            }
        }
    }
    true
}

fn homogeneity(potential: &Potential, probes: &[Vec<f64>]) -> Option<f64> {
    let dim = potential.dim();
    let raw = |x: &[f64]| potential.raw_value(x);
    if raw(&vec![0.0; dim]).abs() > 1e-300 {
        return None;
    }
    let mut estimates: Vec<f64> = probes
        .iter()
        .filter(|x| x.iter().any(|v| *v != 0.0))
        .filter_map(|x| {
            let a = raw(x);
            let b = raw(&scaled(x, 2.0));
            (a > 0.0 && b > 0.0).then(|| (b / a).log2())
        })
        .collect();
    if estimates.is_empty() {
        return None;
    }
    estimates.sort_by(f64::total_cmp);
    let q = estimates[estimates.len() / 2];
    if !(q > 0.0) {
        return None;
    }
    let ok = probes.iter().all(|x| {
        let a = raw(x);
        let b = raw(&scaled(x, 2.0));
        (b - 2f64.powf(q) * a).abs() <= 1e-9 * b.abs()
    });
    ok.then_some(q)
}

/// Largest ladder value A with A·φ₀ ≤ x·∇φ beyond some radius C_A inside the box,
/// where φ₀ = φ − φ(0). Returns (A, C_A).
fn growth_a(potential: &Potential, domain: &ProbeBox, count: usize) -> Option<(f64, f64)> {
    let dim = potential.dim();
    let origin = vec![0.0; dim];
    let h = |e: &[f64], r: f64, a: f64| potential.growth_residual(&scaled(e, r), &origin, a);
    let rays = rays(domain);
    'ladder: for &a in GROWTH_LADDER.iter().rev() {
        let mut c_a: f64 = 0.0;
        let mut min_probe = f64::INFINITY;
        for (e, edge) in &rays {
            let radii: Vec<f64> = (1..=count).map(|k| edge * k as f64 / count as f64).collect();
            min_probe = min_probe.min(radii[0]);
            let passes = |r: f64| {
                let x = scaled(e, r);
                let xg = dot(&x, &potential.grad(&x));
                h(e, r, a) >= -1e-12 * (1.0 + xg.abs())
            };
            let last_fail = radii.iter().rposition(|&r| !passes(r));
            match last_fail {
                None => {}
                Some(i) if i + 1 == radii.len() => continue 'ladder,
                Some(i) => {
                    // bisect the sign change of h between the last failing and first passing probe
                    let (mut lo, mut hi) = (radii[i], radii[i + 1]);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid == lo || mid == hi {
                            break;
                        }
                        if h(e, mid, a) >= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    c_a = c_a.max(hi);
                }
            }
        }
        if c_a == 0.0 {
            c_a = min_probe;
        }
        return Some((a, c_a));
    }
    None
}

/// Smallest ladder value B with x·∇φ ≤ B·φ₀ on the outer half of every ray.
fn growth_b(potential: &Potential, domain: &ProbeBox, count: usize) -> Option<f64> {
    let dim = potential.dim();
    let f0 = potential.value(&vec![0.0; dim]);
    let rays = rays(domain);
    GROWTH_LADDER.iter().copied().find(|&b| {
        rays.iter().all(|(e, edge)| {
            (0..=count / 2).all(|k| {
                let r = edge * (0.5 + 0.5 * k as f64 / (count / 2).max(1) as f64);
                let x = scaled(e, r);
                let xg = dot(&x, &potential.grad(&x));
                xg <= b * (potential.value(&x) - f0) + 1e-12 * (1.0 + xg.abs())
            })
        })
    })
}

fn radially_monotone(potential: &Potential, domain: &ProbeBox, count: usize) -> bool {
    if potential.dim() != 1 {
        return false;
    }
    for (e, edge) in rays(domain) {
        let vals: Vec<f64> = (0..=count)
            .map(|k| potential.hess(&scaled(&e, edge * k as f64 / count as f64))[(0, 0)])
            .collect();
        if !vals.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs())) {
            return false;
        }
    }
    true
}

fn integrability(potential: &Potential) -> Integrability {
    let dim = potential.dim();
    if dim > 2 {
        return Integrability {
            flag: IntegrabilityFlag::NotEvaluated,
            values: Vec::new(),
        };
    }
    let fail = |values| Integrability {
        flag: IntegrabilityFlag::Fail,
        values,
    };
    let center = vec![0.0; dim];
    let f0 = potential.value(&center);
    let Ok(base) = decay_radius(&center, |x| potential.value(x) - f0, 46.0) else {
        return fail(Vec::new());
    };
    let rule = GaussLegendre::new(if dim == 1 { 32 } else { 12 });
    let mut values = Vec::new();
    let mut ok = true;
    for big_r in [1.0, 5.0, 10.0] {
        let integrand = |z: &[f64]| -> f64 {
            let gz = potential.grad(z);
            let gn = dot(&gz, &gz).sqrt();
            let dir: Vec<f64> = if gn > 0.0 {
                gz.iter().map(|v| v / gn).collect()
            } else {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            };
            let target: Vec<f64> = gz.iter().zip(&dir).map(|(g, u)| g + big_r * u).collect();
            let Ok(y0) = grad_inverse(potential, &target) else {
                return f64::NAN;
            };
            let y0n = dot(&y0, &y0).sqrt();
            let ball: Vec<f64> = z.iter().zip(&y0).map(|(a, b)| a - b).collect();
            let mut sup_h: f64 = operator_norm(potential, &ball);
            for d in 0..dim {
                for frac in [-1.0, -0.5, 0.5, 1.0] {
                    let mut y = ball.clone();
                    y[d] += frac * big_r;
                    sup_h = sup_h.max(operator_norm(potential, &y));
                }
            }
            let zn = dot(z, z).sqrt();
            let weight = (-(potential.value(z) - f0)).exp();
            (zn + y0n + big_r).powi(2) * (gn + sup_h) * weight
        };
        // even panel counts keep z = 0, where the direction û flips, on a panel edge
        let panels = 2 * (base / if dim == 1 { 1.0 } else { 2.0 }).ceil() as usize;
        let a = BoxRule::with_rule(&center, base, panels, &rule).integrate(integrand);
        let b = BoxRule::with_rule(&center, 2.0 * base, 2 * panels, &rule).integrate(integrand);
        values.push((big_r, a, b));
        if !(a.is_finite() && b.is_finite()) || (b - a).abs() > 1e-6 * a.abs().max(1e-300) {
            ok = false;
        }
    }
    if ok {
        Integrability {
            flag: IntegrabilityFlag::Pass,
            values,
        }
    } else {
        fail(values)
    }
}

/// Strict convexity and superlinearity on the default probe box [−10, 10]ᵈ.
/// Returns the convexity modulus λ.
pub fn check_convexity(potential: &Potential) -> Result<f64> {
    let dim = potential.dim();
    let count = if dim == 1 { 201 } else { 441 };
    let probes = probe_points(&ProbeBox::symmetric(dim, 10.0), count);
    let lambda = convexity_modulus(potential, &probes)?;
    superlinear(potential)?;
    Ok(lambda)
}

/// Analyze φ on `domain` with about `probe_count` probe points (a tensor grid
/// in dimension ≥ 2, plus the origin).
pub fn analyze_regularity(
    potential: &Potential,
    domain: &ProbeBox,
    probe_count: usize,
) -> Result<RegularityProfile> {
    if probe_count < 16 {
        return Err(Error::InvalidArgument(format!(
            "probe_count must be at least 16, got {probe_count}"
        )));
    }
    if domain.dim() != potential.dim() || domain.hi.len() != domain.lo.len() {
        return Err(Error::DimensionMismatch {
            expected: potential.dim(),
            got: domain.dim(),
        });
    }
    if domain.lo.iter().zip(&domain.hi).any(|(l, h)| !(*l <= 0.0 && 0.0 <= *h && l < h)) {
        return Err(Error::InvalidArgument("probe domain must contain the origin".into()));
    }
    let probes = probe_points(domain, probe_count);
    let lambda = convexity_modulus(potential, &probes)?;
    superlinear(potential)?;

    let is_even = probes.iter().all(|x| {
        let v = potential.value(x);
        let neg: Vec<f64> = x.iter().map(|t| -t).collect();
        (v - potential.value(&neg)).abs() <= 1e-12 * (1.0 + v.abs())
    });
    let (growth_a, c_a) = match growth_a(potential, domain, probe_count) {
        Some((a, c)) => (Some(a), c),
        None => (None, 0.0),
    };
    let oscillation = potential.perturbation().map(|(_, u)| {
        let (lo, hi) = probes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            let v = u.value(x);
            (lo.min(v), hi.max(v))
        });
        hi - lo
    });

    Ok(RegularityProfile {
        lambda,
        is_even,
        hess_unbounded: hessian_growth(potential, lambda),
        hess_radially_monotone: radially_monotone(potential, domain, probe_count),
        homogeneity_q: homogeneity(potential, &probes),
        growth_a,
        c_a,
        growth_b: growth_b(potential, domain, probe_count),
        oscillation,
        integrability: integrability(potential),
    })
}
