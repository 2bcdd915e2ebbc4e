//! Prékopa-Leindler on a grid: if u(x)^a v(y)^b ≤ w(ax + by) for all x, y
//! then (∫u)^a (∫v)^b ≤ ∫w, with b = 1 − a.

use crate::error::{Error, Result};
use crate::grid::GridFunction1D;
use crate::report::{Status, VerificationReport, VIOLATION_RTOL};

/// Slack allowed in the node-pair hypothesis check.
pub const HYPOTHESIS_TOL: f64 = 1e-9;

fn check_inputs(u: &GridFunction1D, v: &GridFunction1D, w: &GridFunction1D, a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("a must lie in (0, 1), got {a}")));
    }
    for (name, f) in [("v", v), ("w", w)] {
        if f.len() != u.len() || f.lo() != u.lo() || f.hi() != u.hi() {
            return Err(Error::InvalidGrid(format!("{name} is not on the grid of u")));
        }
    }
    for (name, f) in [("u", u), ("v", v), ("w", w)] {
        if let Some(x) = f.values().iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, found {x}")));
        }
    }
    Ok(())
}

pub fn check_prekopa_leindler(
    u: &GridFunction1D,
    v: &GridFunction1D,
    w: &GridFunction1D,
    a: f64,
) -> Result<VerificationReport> {
    check_inputs(u, v, w, a)?;
    let b = 1.0 - a;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut violations = 0usize;
    for (x, ux) in u.nodes() {
        let ua = ux.powf(a);
        for (y, vy) in v.nodes() {
            let lhs = ua * vy.powf(b);
            let z = (a * x + b * y).clamp(w.lo(), w.hi());
            let wz = w.interpolate(z).expect("point inside the grid");
            let excess = lhs - wz;
            if excess > HYPOTHESIS_TOL * (1.0 + wz) {
                violations += 1;
            }
            if excess > worst.0 {
                worst = (excess, x, y);
            }
        }
    }
    let lhs = u.trapezoid().powf(a) * v.trapezoid().powf(b);
    let rhs = w.trapezoid();
    let mut r = VerificationReport::new("prekopa_leindler", lhs, rhs, VIOLATION_RTOL * rhs.abs().max(1.0))
        .with_meta("a", a)
        .with_meta("hypothesis_holds", violations == 0)
        .with_meta("hypothesis_violations", violations)
        .with_meta("max_hypothesis_excess", worst.0);
    if violations > 0 {
        r = r.with_witness(vec![worst.1, worst.2]).with_status(Status::ViolatedHypothesis);
    }
    Ok(r)
}

/// Smallest grid function whose linear interpolant dominates u(x)^a v(y)^b
/// at ax + by for every node pair: node k takes the largest product landing
/// in [z_{k−1}, z_{k+1}]. Any (u, v, hull) triple passes the hypothesis.
pub fn prekopa_hull(u: &GridFunction1D, v: &GridFunction1D, a: f64) -> Result<GridFunction1D> {
    check_inputs(u, v, u, a)?;
    let b = 1.0 - a;
    let (lo, h, n) = (u.lo(), u.step(), u.len());
    let mut w = vec![0.0f64; n];
    for (x, ux) in u.nodes() {
        let ua = ux.powf(a);
        for (y, vy) in v.nodes() {
            let p = ua * vy.powf(b);
            let t = ((a * x + b * y - lo) / h).clamp(0.0, (n - 1) as f64);
            let k = (t.floor() as usize).min(n - 2);
            for j in [k, k + 1] {
                w[j] = w[j].max(p);
            }
            if t - k as f64 == 0.0 && k > 0 {
                w[k - 1] = w[k - 1].max(p);
            }
        }
    }
    GridFunction1D::new(u.lo(), u.hi(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn on_grid(f: impl Fn(f64) -> f64) -> GridFunction1D {
        GridFunction1D::from_fn(GridSpec::new(-8.0, 8.0, 401).unwrap(), f).unwrap()
    }

    #[test]
    fn gaussian_self_triple() {
        let g = on_grid(|x| (-0.5 * x * x).exp());
        let r = check_prekopa_leindler(&g, &g, &g, 0.5).unwrap();
        assert_eq!(r.status, Status::Equality);
        assert_eq!(r.meta["hypothesis_holds"], true);
        assert!((r.rhs - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn indicator_triple() {
        let ind = on_grid(|x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 });
        let r = check_prekopa_leindler(&ind, &ind, &ind, 0.5).unwrap();
        assert_eq!(r.meta["hypothesis_holds"], true);
        assert_eq!(r.status, Status::Equality);
    }

    #[test]
    fn broken_triple_has_witness() {
        let ind = on_grid(|x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 });
        let zero = on_grid(|_| 0.0);
        let r = check_prekopa_leindler(&ind, &ind, &zero, 0.5).unwrap();
        assert_eq!(r.status, Status::ViolatedHypothesis);
        let w = r.witness.unwrap();
        assert!((0.0..=1.0).contains(&w[0]) && (0.0..=1.0).contains(&w[1]));
    }

    #[test]
    fn hull_passes_hypothesis() {
        let u = on_grid(|x| (-(x - 1.0).powi(4) / 12.0 - (x - 1.0).powi(2) / 2.0).exp());
        let v = on_grid(|x| (-(x + 0.5).powi(4) / 12.0 - (x + 0.5).powi(2) / 2.0).exp());
        for a in [0.3, 0.5] {
            let w = prekopa_hull(&u, &v, a).unwrap();
            let r = check_prekopa_leindler(&u, &v, &w, a).unwrap();
            assert_eq!(r.meta["hypothesis_holds"], true);
            assert!(!r.status.is_violation());
        }
    }

    #[test]
    fn rejects_mismatched_grids() {
        let a = on_grid(|_| 1.0);
        let b = GridFunction1D::from_fn(GridSpec::new(-8.0, 8.0, 201).unwrap(), |_| 1.0).unwrap();
        assert!(check_prekopa_leindler(&a, &a, &b, 0.5).is_err());
        assert!(check_prekopa_leindler(&a, &a, &a, 1.0).is_err());
    }
}
