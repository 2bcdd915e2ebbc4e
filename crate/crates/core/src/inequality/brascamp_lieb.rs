//! Var_μ(g) ≤ ∫ ∇g·Hess(φ)⁻¹∇g dμ.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::measure::Measure;
use crate::regularity::check_convexity;
use crate::report::{at_two_resolutions, VerificationReport};

fn sides(measure: &Measure, g: &dyn SmoothFn) -> Result<(f64, f64)> {
    let lhs = measure.variance(|x| g.value(x))?;
    let pot = measure.potential();
    let q = measure.try_map_nodes(|x| {
        let h = pot.hess(x);
        let v = DVector::from_vec(g.grad(x));
        let chol = h.cholesky().ok_or_else(|| Error::SingularHessian { point: x.to_vec() })?;
        Ok(v.dot(&chol.solve(&v)))
    })?;
    Ok((lhs, measure.sum_weighted(&q)?))
}

/// Requires a uniformly convex potential (λ > 0): with a degenerate Hessian
/// the right side diverges for generic g.
pub fn verify_brascamp_lieb(measure: &Measure, g: &dyn SmoothFn) -> Result<VerificationReport> {
    let lambda = check_convexity(measure.potential())?;
    if lambda <= 0.0 {
        return Err(Error::Hypothesis(format!("lambda={lambda}: Hessian degenerates on the probe grid")));
    }
    let (c, f) = at_two_resolutions(measure, |m| sides(m, g))?;
    Ok(VerificationReport::two_resolution("brascamp_lieb", c, f).with_meta("lambda", lambda))
}
