//! Brascamp-Lieb variance bound Var(g) ≤ ∫ ∇g·(∇²φ)⁻¹∇g dμ.

use convexlab::func::{Bump, Linear, SmoothFn};
use convexlab::inequality::verify_brascamp_lieb;
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    let m = build_measure(&Potential::quartic(), DEFAULT_ACCURACY)?;
    let cases: Vec<(&str, Box<dyn SmoothFn>)> = vec![
        ("bump", Box::new(Bump::scalar(0.4, 0.5, 0.8))),
        ("wide bump", Box::new(Bump::scalar(-0.3, -1.0, 2.0))),
        ("linear", Box::new(Linear::scalar(1.0))),
    ];
    for (name, g) in &cases {
        let r = verify_brascamp_lieb(&m, g.as_ref())?;
        println!("{name:>10}: Var {:.6e} <= {:.6e}  ratio {:.3} {}", r.lhs, r.rhs, r.lhs / r.rhs, r.status.as_str());
    }
    // the Gaussian with a linear g is the equality case
    let gm = build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY)?;
    let r = verify_brascamp_lieb(&gm, &Linear::scalar(2.0))?;
    println!("gaussian linear: margin {:.1e} {}", r.margin, r.status.as_str());
    Ok(())
}
