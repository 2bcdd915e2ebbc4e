//! Prékopa-Leindler on grids: the smallest admissible w (the hull) passes,
//! a scaled-down w fails with a witness.

use convexlab::grid::{GridFunction1D, GridSpec};
use convexlab::inequality::{check_prekopa_leindler, prekopa_hull};

fn main() -> convexlab::Result<()> {
    let spec = GridSpec::new(-8.0, 8.0, 321)?;
    let u = GridFunction1D::from_fn(spec, |x| (-0.5 * (x - 1.0).powi(2)).exp())?;
    let v = GridFunction1D::from_fn(spec, |x| (-(x + 0.5).powi(4) / 4.0).exp())?;
    for a in [0.25, 0.5, 0.75] {
        let w = prekopa_hull(&u, &v, a)?;
        let r = check_prekopa_leindler(&u, &v, &w, a)?;
        println!("a={a}: (int u)^a (int v)^(1-a) = {:.6} <= int w = {:.6} {}", r.lhs, r.rhs, r.status.as_str());
    }
    let w = prekopa_hull(&u, &v, 0.5)?;
    let small = GridFunction1D::new(w.lo(), w.hi(), w.nodes().map(|(_, y)| 0.5 * y).collect())?;
    let r = check_prekopa_leindler(&u, &v, &small, 0.5)?;
    println!("halved w: {} at witness {:?}", r.status.as_str(), r.witness);
    Ok(())
}
