//! Legendre transforms: pointwise Newton values against the discrete
//! linear-time transform on a grid, and the Young gap at a few points.

use convexlab::conjugate::{conjugate_at, conjugate_value};
use convexlab::grid::{llt_1d, GridFunction1D, GridSpec};
use convexlab::potential::Potential;

fn main() -> convexlab::Result<()> {
    let quartic = Potential::quartic();
    println!("{:>6} {:>14} {:>14} {:>6}", "y", "phi*(y)", "argmax", "iters");
    for y in [-3.0, -1.0, 0.0, 0.5, 2.0, 6.0] {
        let r = conjugate_at(&quartic, &[y])?;
        println!("{y:>6} {:>14.10} {:>14.10} {:>6}", r.value, r.argmax[0], r.newton_iters);
    }

    // discrete transform of the sampled potential on [-4, 4]
    let primal = GridFunction1D::from_fn(GridSpec::new(-4.0, 4.0, 2001)?, |x| quartic.value(&[x]))?;
    let dual = llt_1d(&primal, GridSpec::new(-3.0, 3.0, 61)?)?;
    let worst = dual
        .nodes()
        .map(|(y, v)| (v - conjugate_value(&quartic, &[y]).unwrap()).abs())
        .fold(0.0, f64::max);
    println!("grid transform vs Newton on [-3, 3]: max difference {worst:.2e}");

    // Young: φ(x) + φ*(y) ≥ xy, with equality at y = φ'(x)
    for x in [0.3, 1.7] {
        let y = quartic.grad(&[x])[0];
        let gap = quartic.value(&[x]) + conjugate_value(&quartic, &[y])? - x * y;
        println!("Young gap at x={x}, y=phi'(x): {gap:.1e}");
    }
    Ok(())
}
