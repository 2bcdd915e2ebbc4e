//! Modified log-Sobolev inequality Ent(e^g) ≤ ∫ (∇g·∇φ* bracket) e^g dμ on
//! random bumps, plus the linear extremal for the Gaussian.

use convexlab::func::Linear;
use convexlab::inequality::verify_mlsi;
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;
use convexlab::suite::{test_functions, TestFunctionSpec};

fn main() -> convexlab::Result<()> {
    let spec = TestFunctionSpec { count: 5, seed: 3, ..Default::default() };
    for (name, phi) in [("gaussian", Potential::gaussian(1)), ("quartic", Potential::quartic())] {
        let m = build_measure(&phi, DEFAULT_ACCURACY)?;
        for (i, g) in test_functions(&spec, 1).iter().enumerate() {
            let r = verify_mlsi(&m, g.as_ref())?;
            println!("{name} g{i}: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
        }
        let r = verify_mlsi(&m, &Linear::scalar(1.0))?;
        println!("{name} linear: margin {:.2e} {}", r.margin, r.status.as_str());
    }
    Ok(())
}
