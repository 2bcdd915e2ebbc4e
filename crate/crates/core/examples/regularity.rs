//! Regularity profiles: convexity constant, growth exponents and the
//! crossing radius, probed on a box.

use convexlab::potential::Potential;
use convexlab::regularity::{analyze_regularity, ProbeBox};

fn main() -> convexlab::Result<()> {
    for (name, phi) in [
        ("gaussian", Potential::gaussian(1)),
        ("quartic", Potential::quartic()),
        ("power p=3", Potential::power(1, 3.0)?),
        ("perturbed", Potential::perturbed_sine(Potential::gaussian(1), 0.1)),
    ] {
        let r = analyze_regularity(&phi, &ProbeBox::symmetric(1, 10.0), 401)?;
        println!(
            "{name:>10}: lambda={:.4} even={} hess_unbounded={} q={:?} A={:?} C_A={:.6} B={:?}",
            r.lambda, r.is_even, r.hess_unbounded, r.homogeneity_q, r.growth_a, r.c_a, r.growth_b
        );
    }
    Ok(())
}
