//! Transport-entropy inequality W_φ(Fμ, μ) ≤ Ent_μ(F) in one dimension
//! with the Bregman cost of φ, solved by monotone rearrangement.

use std::sync::Arc;

use convexlab::func::{Bump, SmoothFn};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;
use convexlab::transport::{verify_transport, wasserstein_bregman_1d, TransportInstance};

fn main() -> convexlab::Result<()> {
    let m = build_measure(&Potential::quartic(), DEFAULT_ACCURACY)?;
    for (a, c, w) in [(0.5, 0.0, 1.0), (-0.4, 1.0, 0.5), (0.8, -1.5, 1.5)] {
        let g = Bump::scalar(a, c, w);
        let inst = TransportInstance::new(m.clone(), Arc::new(move |x| g.value(&[x])))?;
        let cost = wasserstein_bregman_1d(&inst)?;
        let r = verify_transport(&inst)?;
        println!("bump({a}, {c}, {w}): W = {cost:.6e}  Ent = {:.6e}  {}", r.rhs, r.status.as_str());
    }
    // a linear tilt of the Gaussian is a shift, where both sides agree
    let gm = build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY)?;
    let inst = TransportInstance::new(gm, Arc::new(|x| 0.8 * x))?;
    let r = verify_transport(&inst)?;
    println!("gaussian shift: W = {:.9} Ent = {:.9} {}", r.lhs, r.rhs, r.status.as_str());
    Ok(())
}
