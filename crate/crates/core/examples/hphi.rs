//! The H_φ profile of a potential whose Hessian is unbounded, its pointwise
//! bound on a grid, and the entropy inequality it feeds.

use convexlab::func::Bump;
use convexlab::inequality::{check_pointwise_bound_with, extract_hphi, verify_hphi_mlsi_with, HPhiForm};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    let q = Potential::quartic();
    let p = extract_hphi(&q)?;
    println!(
        "profile: lambda={} A={} C={:.16} coeff={} tail_coeff={} switch={:.6}",
        p.lambda, p.a, p.c, p.coeff, p.tail_coeff, p.c_h
    );
    for y in [0.5, 2.0, 10.0, 40.0] {
        println!("  H({y}) = {:.6}", p.evaluate(y));
    }

    let grid: Vec<f64> = (0..121).map(|k| -6.0 + 0.1 * k as f64).collect();
    for form in [HPhiForm::Corrected, HPhiForm::AsStated] {
        let r = check_pointwise_bound_with(&p, &q, &grid, &grid, form)?;
        println!("pointwise {form:?}: {} violations, max excess {:.3e}", r.meta["violations"], r.lhs);
    }

    let m = build_measure(&q, DEFAULT_ACCURACY)?;
    let r = verify_hphi_mlsi_with(&m, &p, &Bump::scalar(0.5, 0.3, 0.9))?;
    println!("entropy bound: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
    // the Gaussian has a bounded Hessian, so no profile exists
    if let Err(e) = extract_hphi(&Potential::gaussian(1)) {
        println!("gaussian: {e}");
    }
    Ok(())
}
