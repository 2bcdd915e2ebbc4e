//! Verifiers. Each evaluates one inequality as `lhs ≤ rhs` on a quadrature
//! grid and returns a [`VerificationReport`](crate::report::VerificationReport)
//! with a signed margin.
//!
//! Integral verifiers run at two resolutions (the measure's own panels and
//! twice as many); the spread between them is added to the violation
//! tolerance.

pub mod brascamp_lieb;
pub mod euclidean;
pub mod hphi;
pub mod mlsi;
pub mod nontight;
pub mod perturbed;
pub mod power;
pub mod prekopa;

pub use brascamp_lieb::verify_brascamp_lieb;
pub use euclidean::{verify_euclidean_lsi, verify_homogeneous_elsi};
pub use hphi::{
    check_pointwise_bound, check_pointwise_bound_with, extract_hphi, verify_hphi_mlsi, verify_hphi_mlsi_with, HPhiForm,
    HPhiProfile,
};
pub use mlsi::{gaussian_bracket_identity, verify_mlsi};
pub use nontight::{nontight_constants, verify_nontight, NontightConstants};
pub use perturbed::{grid_oscillation, perturbed_measure, verify_perturbed, verify_perturbed_on};
pub use power::{power_lsi_constant, power_lsi_constant_capped, verify_power_lsi, verify_power_lsi_with_constant};
pub use prekopa::{check_prekopa_leindler, prekopa_hull};

use crate::error::{Error, Result};
use crate::quadrature::NeumaierSum;

/// ∫ f·e^g over node masses, with e^g evaluated relative to max g.
pub(crate) fn exp_weighted(mass: &[f64], g: &[f64], f: &[f64]) -> Result<f64> {
    let m = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::NonFinite("test function is not finite on the grid".into()));
    }
    let mut s = NeumaierSum::default();
    for ((w, gv), fv) in mass.iter().zip(g).zip(f) {
        if !fv.is_finite() {
            return Err(Error::NonFinite(format!("integrand value {fv}")));
        }
        s.add(w * fv * (gv - m).exp());
    }
    let scale = m.exp();
    if !scale.is_finite() {
        return Err(Error::Overflow(format!("e^g with max g = {m}")));
    }
    Ok(scale * s.total())
}

/// Index and value of the smallest entry.
pub(crate) fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) })
}
