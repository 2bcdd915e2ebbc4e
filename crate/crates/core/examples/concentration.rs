//! Concentration for product measures: Monte Carlo tails of the centered
//! sum against the calibrated bound, with Wilson upper limits.

use convexlab::concentration::{default_lambda_grid, run_concentration, Functional};
use convexlab::measure::{build_measure, DEFAULT_ACCURACY};
use convexlab::potential::Potential;
use convexlab::suite::concentration_bound;

fn main() -> convexlab::Result<()> {
    for (name, phi) in [("gaussian", Potential::gaussian(1)), ("quartic", Potential::quartic())] {
        let m = build_measure(&phi, DEFAULT_ACCURACY)?;
        let bound = concentration_bound(&phi)?;
        println!("{name}: C1={:.4} C2={:.4} C3={:.4}", bound.c1, bound.c2, bound.c3);
        let n = 10;
        let grid = default_lambda_grid(&bound, n);
        let res = run_concentration(&m, &Functional::Sum, n, &bound, &grid, 50_000, 1)?;
        for i in (0..grid.len()).step_by(grid.len().div_ceil(6).max(1)) {
            println!(
                "  lambda {:>7.3}: empirical {:.5} (upper {:.5}) bound {:.5} {}",
                res.lambda_grid[i],
                res.empirical_tail[i],
                res.wilson_upper[i],
                res.theoretical_bound[i],
                res.regime[i].as_str()
            );
        }
        println!("  holds on the whole grid: {}", res.holds());
    }
    Ok(())
}
