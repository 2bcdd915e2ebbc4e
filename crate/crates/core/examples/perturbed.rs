//! Bounded perturbations φ + U of a convex potential: the inequality still
//! holds with a constant degraded by e^{osc U}.

use std::sync::Arc;

use convexlab::func::{Bump, Sine, SmoothFn};
use convexlab::inequality::{grid_oscillation, perturbed_measure, verify_perturbed_on};
use convexlab::measure::DEFAULT_ACCURACY;
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    let base = Potential::gaussian(1);
    for amp in [0.05, 0.1, 0.3] {
        let u: Arc<dyn SmoothFn> = Arc::new(Sine::new(1, amp, 1.0));
        let m = perturbed_measure(&base, u.clone(), DEFAULT_ACCURACY)?;
        let osc = grid_oscillation(&m, u.as_ref())?;
        let r = verify_perturbed_on(&m, &Bump::scalar(0.4, 0.2, 1.0))?;
        println!("amplitude {amp}: osc {osc:.4}  lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
    }
    Ok(())
}
