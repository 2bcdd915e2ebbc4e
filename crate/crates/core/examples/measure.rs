//! Log-concave measures dμ = e^{−φ}dx: normalizer, moments, entropy of a
//! tilt and seeded inverse-cdf sampling.

use convexlab::func::{Bump, SmoothFn};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    for (name, phi) in [
        ("gaussian", Potential::gaussian(1)),
        ("quartic", Potential::quartic()),
        ("power p=4", Potential::power(1, 4.0)?),
    ] {
        let m = build_measure(&phi, DEFAULT_ACCURACY)?;
        let second = m.integrate(|x| x[0] * x[0])?;
        let g = Bump::scalar(0.5, 0.3, 1.0);
        let ent = m.entropy(|x| g.value(x))?;
        let sample = m.sample_1d(50_000, 7)?;
        let emp = sample.iter().map(|x| x * x).sum::<f64>() / sample.len() as f64;
        println!(
            "{name:>10}: log Z = {:.10}, E x^2 = {second:.6} (sampled {emp:.4}), Ent(e^g) = {ent:.3e}, {} nodes",
            m.log_z(),
            m.len()
        );
    }
    Ok(())
}
