//! Euclidean log-Sobolev inequalities with respect to Lebesgue measure:
//! the φ-version and the homogeneous version with a cost |x|^q/q.

use std::sync::Arc;

use convexlab::func::{Bump, PotentialProfile, SmoothFn, Sum};
use convexlab::inequality::{verify_euclidean_lsi, verify_homogeneous_elsi};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;

/// log of an integrable density: −φ plus a bump.
fn density(phi: &Potential, bump: Bump) -> Sum {
    let base: Arc<dyn SmoothFn> = Arc::new(PotentialProfile::new(phi.clone(), vec![0.0], 1.0, 0.0));
    Sum(vec![base, Arc::new(bump)])
}

fn main() -> convexlab::Result<()> {
    // the φ-version needs ∫e^{−φ} = 1, so take the normalized potential
    let phi = build_measure(&Potential::quartic(), DEFAULT_ACCURACY)?.potential().clone();
    for bump in [Bump::scalar(0.4, 0.0, 1.0), Bump::scalar(-0.5, 1.0, 0.6)] {
        let r = verify_euclidean_lsi(&phi, &density(&phi, bump), 1.0)?;
        println!("phi-LSI: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
    }
    for q in [2.0, 3.0] {
        let c = Potential::power(1, q)?;
        let r = verify_homogeneous_elsi(&c, q, &density(&c, Bump::scalar(0.3, 0.5, 1.0)))?;
        println!("homogeneous q={q}: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
        // the cost itself is an extremal
        let r = verify_homogeneous_elsi(&c, q, &PotentialProfile::new(c.clone(), vec![0.5], 1.0, 0.0))?;
        println!("homogeneous q={q} extremal: margin {:.1e} {}", r.margin, r.status.as_str());
    }
    Ok(())
}
