//! Non-tight constants: from the growth exponent of φ to explicit
//! constants, then a check on test functions.

use convexlab::func::Bump;
use convexlab::inequality::{nontight_constants, verify_nontight};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;
use convexlab::regularity::{analyze_regularity, ProbeBox};

fn main() -> convexlab::Result<()> {
    for (name, phi) in [("gaussian", Potential::gaussian(1)), ("quartic", Potential::quartic())] {
        let reg = analyze_regularity(&phi, &ProbeBox::symmetric(1, 10.0), 401)?;
        let b = reg.growth_b.expect("both potentials have polynomial growth");
        let m = build_measure(&phi, DEFAULT_ACCURACY)?;
        let k = nontight_constants(&m, b - 1.0)?;
        println!("{name}: B={b} alpha={:.3} lambda*={:.6} C=({:.4}, {:.4}, {:.4})", k.alpha, k.lambda, k.c1, k.c2, k.c3);
        let r = verify_nontight(&m, &Bump::scalar(0.5, -0.4, 1.2), &k)?;
        println!("  bump: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
    }
    Ok(())
}
