//! Log-Sobolev inequality for power potentials |x|^p/p with the sharp
//! constant c(p, n) found by multi-start maximization.

use convexlab::func::Bump;
use convexlab::inequality::{power_lsi_constant, verify_power_lsi_with_constant};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    for p in [2.0, 3.0, 4.0] {
        let c = power_lsi_constant(p, 1)?;
        let m = build_measure(&Potential::power(1, p)?, DEFAULT_ACCURACY)?;
        let r = verify_power_lsi_with_constant(&m, p, c, &Bump::scalar(0.4, 0.2, 1.0))?;
        println!("p={p}: c={c:.9}  bump: lhs {:.6e} rhs {:.6e} {}", r.lhs, r.rhs, r.status.as_str());
    }
    Ok(())
}
