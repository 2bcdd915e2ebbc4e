//! The sup-convolution g_s and the first-order rate (g_s − g)/s as s → 0,
//! fitted on a ladder of s values.

use convexlab::func::Bump;
use convexlab::potential::Potential;
use convexlab::supconv::{expansion_order, sup_convolution, S_LADDER};

fn main() -> convexlab::Result<()> {
    let phi = Potential::quartic();
    let g = Bump::scalar(0.4, -0.3, 0.8);
    let z = [0.7];
    for s in [0.2, 0.05, 0.01] {
        let r = sup_convolution(&g, &phi, s, &z)?;
        println!("s={s}: g_s(z) = {:.10}  gain {:.3e}  argmax y={:.6}  iters {}", r.value, r.gain, r.y[0], r.iterations);
    }
    let fit = expansion_order(&g, &phi, &z, &S_LADDER)?;
    println!(
        "limit slope {:.8} vs bracket {:.8}  relative gap {:.1e}  order {:?}",
        fit.slope,
        fit.integrand,
        fit.relative_gap(),
        fit.order
    );
    Ok(())
}
