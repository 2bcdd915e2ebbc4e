//! The modified log-Sobolev inequality
//!
//! Ent_μ(e^g) ≤ ∫ { x·∇g − φ*(∇φ(x)) + φ*(∇φ(x) − ∇g(x)) } e^g dμ.

use crate::conjugate::{conjugate_value, mlsi_bracket};
use crate::error::Result;
use crate::func::SmoothFn;
use crate::measure::{entropy_values, Measure};
use crate::potential::Potential;
use crate::report::{at_two_resolutions, VerificationReport};

use super::{argmin, exp_weighted};

/// Nodes where the integrand is below this are reported as witnesses.
pub const BRACKET_FLOOR: f64 = -1e-9;

pub(crate) struct MlsiSides {
    pub lhs: f64,
    pub rhs: f64,
    pub min_bracket: f64,
    pub min_at: Vec<f64>,
}

pub(crate) fn mlsi_sides(measure: &Measure, bracket_of: &Potential, g: &dyn SmoothFn) -> Result<MlsiSides> {
    let gv = measure.map_nodes(|x| g.value(x));
    let lhs = entropy_values(measure.masses(), &gv)?;
    let br = measure.try_map_nodes(|x| mlsi_bracket(bracket_of, x, &g.grad(x)))?;
    let rhs = exp_weighted(measure.masses(), &gv, &br)?;
    let (i, min_bracket) = argmin(&br);
    Ok(MlsiSides {
        lhs,
        rhs,
        min_bracket,
        min_at: measure.rule().point(i).to_vec(),
    })
}

pub fn verify_mlsi(measure: &Measure, g: &dyn SmoothFn) -> Result<VerificationReport> {
    let pot = measure.potential().clone();
    let (c, f) = at_two_resolutions(measure, |m| mlsi_sides(m, &pot, g))?;
    let mut r = VerificationReport::two_resolution("mlsi", (c.lhs, c.rhs), (f.lhs, f.rhs))
        .with_meta("min_integrand", f.min_bracket.min(c.min_bracket));
    if f.min_bracket < BRACKET_FLOOR {
        r = r.with_witness(f.min_at);
    }
    Ok(r)
}

/// x·v − φ*(x) + φ*(x − v) for φ = ‖x‖²/2, evaluated literally through the
/// conjugation engine; algebraically it is ‖v‖²/2.
pub fn gaussian_bracket_identity(x: &[f64], v: &[f64]) -> f64 {
    let phi = Potential::gaussian(x.len());
    let xv: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    let diff: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
    let a = conjugate_value(&phi, x).expect("closed form");
    let b = conjugate_value(&phi, &diff).expect("closed form");
    xv - a + b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{Bump, Constant, Linear};
    use crate::measure::{build_measure, DEFAULT_ACCURACY};
    use crate::report::Status;

    #[test]
    fn zero_function_is_equality() {
        let m = build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY).unwrap();
        let r = verify_mlsi(&m, &Constant::new(1, 0.0)).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert_eq!(r.status, Status::Equality);
    }

    #[test]
    fn gaussian_tilt_is_equality() {
        let m = build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY).unwrap();
        let r = verify_mlsi(&m, &Linear::scalar(1.0)).unwrap();
        let exact = 0.5 * 0.5f64.exp();
        assert!((r.lhs - exact).abs() < 1e-7);
        assert!((r.rhs - exact).abs() < 1e-7);
        assert_eq!(r.status, Status::Equality);
    }

    #[test]
    fn quartic_bump_holds() {
        let m = build_measure(&Potential::quartic(), DEFAULT_ACCURACY).unwrap();
        let r = verify_mlsi(&m, &Bump::scalar(0.3, 0.5, 1.0)).unwrap();
        assert_eq!(r.status, Status::Holds, "{r:?}");
        assert!(r.margin > 0.0);
        assert!(r.meta_f64("min_integrand").unwrap() >= BRACKET_FLOOR);
    }

    #[test]
    fn bracket_identity() {
        assert_eq!(gaussian_bracket_identity(&[2.0], &[3.0]), 4.5);
        assert_eq!(gaussian_bracket_identity(&[0.0], &[0.0]), 0.0);
        let v = gaussian_bracket_identity(&[1.0, -2.0], &[0.5, 3.0]);
        assert!((v - 0.5 * (0.25 + 9.0)).abs() < 1e-12);
    }
}
