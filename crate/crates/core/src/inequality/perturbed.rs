//! Bounded perturbations: for Φ = φ + U with osc(U) = sup U − inf U,
//!
//! Ent_{μ_Φ}(e^g) ≤ e^{2 osc(U)} ∫ { bracket of φ } e^g dμ_Φ.

use std::sync::Arc;

use crate::conjugate::grad_inverse;
use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::measure::{build_measure_at, Measure};
use crate::potential::Potential;
use crate::quadrature::BoxRule;
use crate::regularity::check_convexity;
use crate::report::{at_two_resolutions, VerificationReport};

use super::mlsi::{mlsi_sides, BRACKET_FLOOR};

/// Relative growth of osc(U) under box doubling treated as divergence.
const OSC_GROWTH: f64 = 0.01;

fn oscillation(rule: &BoxRule, u: &dyn SmoothFn) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, _) in rule.iter() {
        let v = u.value(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("perturbation at {x:?}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// osc(U) on the quadrature box, checked against the box of twice the
/// radius; growth beyond 1% signals an unbounded U.
pub fn grid_oscillation(measure: &Measure, u: &dyn SmoothFn) -> Result<f64> {
    let spec = measure.quadrature();
    let osc = oscillation(measure.rule(), u)?;
    let wide = oscillation(&BoxRule::new(&spec.center, 2.0 * spec.radius, 2 * spec.panels), u)?;
    if wide > osc * (1.0 + OSC_GROWTH) + 1e-9 {
        return Err(Error::Hypothesis(format!(
            "oscillation divergence: osc(U) grows from {osc} to {wide} when the box doubles"
        )));
    }
    Ok(osc)
}

/// Build μ_Φ for Φ = base + U, with the quadrature box centered at the
/// minimizer of the base potential.
pub fn perturbed_measure(base: &Potential, u: Arc<dyn SmoothFn>, accuracy: f64) -> Result<Measure> {
    check_convexity(base)?;
    let center = grad_inverse(base, &vec![0.0; base.dim()])?;
    build_measure_at(&Potential::perturbed(base.clone(), u)?, &center, accuracy)
}

pub fn verify_perturbed(base: &Potential, u: Arc<dyn SmoothFn>, g: &dyn SmoothFn, accuracy: f64) -> Result<VerificationReport> {
    verify_perturbed_on(&perturbed_measure(base, u, accuracy)?, g)
}

/// As [`verify_perturbed`] on a measure whose potential is `Potential::perturbed`.
pub fn verify_perturbed_on(measure: &Measure, g: &dyn SmoothFn) -> Result<VerificationReport> {
    let (base, u) = measure
        .potential()
        .perturbation()
        .ok_or_else(|| Error::InvalidArgument("measure potential is not a perturbed potential".into()))?;
    let osc = grid_oscillation(measure, u.as_ref())?;
    let factor = (2.0 * osc).exp();
    let (c, f) = at_two_resolutions(measure, |m| mlsi_sides(m, base, g))?;
    let mut r = VerificationReport::two_resolution("perturbed", (c.lhs, factor * c.rhs), (f.lhs, factor * f.rhs))
        .with_meta("osc", osc)
        .with_meta("factor", factor)
        .with_meta("unscaled_rhs", f.rhs)
        .with_meta("min_integrand", f.min_bracket.min(c.min_bracket));
    if f.min_bracket < BRACKET_FLOOR {
        r = r.with_witness(f.min_at);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{Constant, Linear, Sine};
    use crate::inequality::verify_mlsi;
    use crate::measure::{build_measure, DEFAULT_ACCURACY};
    use crate::report::Status;

    #[test]
    fn constant_perturbation_matches_mlsi() {
        let base = Potential::quartic();
        let g = Linear::scalar(0.4);
        let p = verify_perturbed(&base, Arc::new(Constant::new(1, 5.0)), &g, DEFAULT_ACCURACY).unwrap();
        let m = verify_mlsi(&build_measure(&base, DEFAULT_ACCURACY).unwrap(), &g).unwrap();
        assert_eq!(p.meta_f64("osc"), Some(0.0));
        assert!((p.lhs - m.lhs).abs() < 1e-10);
        assert!((p.rhs - m.rhs).abs() < 1e-10);
    }

    #[test]
    fn sine_perturbation_holds() {
        let base = Potential::gaussian(1);
        let u: Arc<dyn SmoothFn> = Arc::new(Sine::new(1, 0.1, 1.0));
        let r = verify_perturbed(&base, u, &Linear::scalar(0.3), DEFAULT_ACCURACY).unwrap();
        assert_eq!(r.status, Status::Holds);
        let osc = r.meta_f64("osc").unwrap();
        assert!((osc - 0.2).abs() < 1e-3, "{osc}");
        assert!((r.meta_f64("factor").unwrap() - (2.0 * osc).exp()).abs() < 1e-15);
        assert!(r.rhs > r.meta_f64("unscaled_rhs").unwrap());
    }

    #[test]
    fn unbounded_perturbation_is_rejected() {
        let e = verify_perturbed(&Potential::gaussian(1), Arc::new(Linear::scalar(1.0)), &Constant::new(1, 0.0), DEFAULT_ACCURACY)
            .unwrap_err();
        assert!(e.is_hypothesis() && e.to_string().contains("oscillation divergence"), "{e}");
    }
}
