//! Uniformly sampled functions on an interval and their discrete
//! Legendre-Fenchel transform.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Samples of f at `lo + i·h`, `h = (hi − lo)/(count − 1)`. `+∞` marks points
/// outside the effective domain, which must be a contiguous index range.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

/// Node layout of a dual grid: `count` equispaced points on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need count >= 2 and finite lo < hi, got [{lo}, {hi}] with {count} nodes"
            )));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }
}

impl GridFunction1D {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        GridSpec::new(lo, hi, values.len())?;
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidGrid("values must be finite or +inf".into()));
        }
        let finite: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
        let (Some(&first), Some(&last)) = (finite.first(), finite.last()) else {
            return Err(Error::EmptyDomain);
        };
        if last - first + 1 != finite.len() {
            return Err(Error::InvalidGrid("effective domain is not contiguous".into()));
        }
        Ok(Self { lo, hi, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..spec.count).map(|i| f(spec.node(i))).collect();
        Self::new(spec.lo, spec.hi, values)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lo: self.lo,
            hi: self.hi,
            count: self.values.len(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn step(&self) -> f64 {
        self.spec().step()
    }
    pub fn node(&self, i: usize) -> f64 {
        self.spec().node(i)
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index range of the finite values.
    pub fn effective_range(&self) -> std::ops::RangeInclusive<usize> {
        let first = self.values.iter().position(|v| v.is_finite()).unwrap_or(0);
        let last = self.values.iter().rposition(|v| v.is_finite()).unwrap_or(0);
        first..=last
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let spec = self.spec();
        self.values.iter().enumerate().map(move |(i, v)| (spec.node(i), *v))
    }

    /// Piecewise-linear interpolation; `None` outside [lo, hi].
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let h = self.step();
        let t = (x - self.lo) / h;
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        if frac <= 0.0 {
            return Some(a);
        }
        if frac >= 1.0 {
            return Some(b);
        }
        if a.is_infinite() || b.is_infinite() {
            return Some(f64::INFINITY);
        }
        Some(a + frac * (b - a))
    }

    /// Trapezoid rule over the whole grid. Infinite values make the integral infinite.
    pub fn trapezoid(&self) -> f64 {
        let h = self.step();
        let n = self.values.len();
        let mut s = crate::quadrature::NeumaierSum::default();
        for (i, v) in self.values.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            s.add(w * v);
        }
        s.total() * h
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.nodes() {
            if v.is_infinite() {
                let _ = writeln!(out, "{x},inf");
            } else {
                let _ = writeln!(out, "{x},{v}");
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "x,value" => {}
            Some((_, header)) => {
                return Err(Error::Parse(format!("line 1: expected header \"x,value\", got {header:?}")))
            }
            None => return Err(Error::Parse("empty grid file".into())),
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (n, line) in lines {
            let mut parts = line.split(',').map(str::trim);
            let (Some(x), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", n + 1)));
            };
            let x: f64 = x
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad abscissa {x:?}", n + 1)))?;
            let v: f64 = match v {
                "inf" => f64::INFINITY,
                other => other
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad value {other:?}", n + 1)))?,
            };
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 2 {
            return Err(Error::InvalidGrid("need at least two rows".into()));
        }
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let spec = GridSpec::new(lo, hi, xs.len())?;
        for (i, x) in xs.iter().enumerate() {
            if (x - spec.node(i)).abs() > 1e-9 * (1.0 + x.abs()) {
                return Err(Error::InvalidGrid(format!("abscissa {x} at row {} is not equispaced", i + 1)));
            }
        }
        Self::new(lo, hi, vs)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Discrete conjugate f*(y_j) = max_i { y_j·x_i − f(x_i) } on the `dual` nodes.
///
/// Linear time: the maximizer for slope y is the lower-hull vertex whose
/// adjacent edge slopes bracket y, and those vertices move right as y grows.
/// When two vertices tie, the one with the smaller abscissa wins.
pub fn llt_1d(f: &GridFunction1D, dual: GridSpec) -> Result<GridFunction1D> {
    let range = f.effective_range();
    if !f.values[*range.start()].is_finite() {
        return Err(Error::EmptyDomain);
    }
    let pts: Vec<(f64, f64)> = range.map(|i| (f.node(i), f.values[i])).collect();

    // lower convex hull, left to right; collinear points are dropped
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let mut out = Vec::with_capacity(dual.count);
    let mut k = 0;
    for j in 0..dual.count {
        let y = dual.node(j);
        // advance while the next vertex is strictly better
        while k + 1 < hull.len() {
            let (x0, f0) = hull[k];
            let (x1, f1) = hull[k + 1];
            if y * x1 - f1 > y * x0 - f0 {
                k += 1;
            } else {
                break;
            }
        }
        out.push(y * hull[k].0 - hull[k].1);
    }
    GridFunction1D::new(dual.lo, dual.hi, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &GridFunction1D, dual: GridSpec) -> Vec<f64> {
        (0..dual.count)
            .map(|j| {
                let y = dual.node(j);
                f.nodes()
                    .filter(|(_, v)| v.is_finite())
                    .map(|(x, v)| y * x - v)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    #[test]
    fn quadratic_conjugate_error_bound() {
        let f = GridFunction1D::from_fn(GridSpec::new(-4.0, 4.0, 401).unwrap(), |x| 0.5 * x * x).unwrap();
        let h = f.step();
        let dual = GridSpec::new(-3.0, 3.0, 301).unwrap();
        let g = llt_1d(&f, dual).unwrap();
        for (y, v) in g.nodes() {
            assert!((v - 0.5 * y * y).abs() <= h * y.abs() + 0.5 * h * h + 1e-12);
        }
        for (a, b) in g.values().iter().zip(brute(&f, dual)) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn absolute_value_conjugate_vanishes() {
        let f = GridFunction1D::from_fn(GridSpec::new(-1.0, 1.0, 201).unwrap(), f64::abs).unwrap();
        let g = llt_1d(&f, GridSpec::new(-1.0, 1.0, 81).unwrap()).unwrap();
        for v in g.values() {
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn single_point_domain() {
        let mut values = vec![f64::INFINITY; 11];
        values[7] = 2.5;
        let f = GridFunction1D::new(0.0, 1.0, values).unwrap();
        let x0 = f.node(7);
        let dual = GridSpec::new(-2.0, 2.0, 9).unwrap();
        let g = llt_1d(&f, dual).unwrap();
        for (y, v) in g.nodes() {
            assert_eq!(v, y * x0 - 2.5);
        }
    }

    #[test]
    fn non_convex_input_matches_brute_force() {
        let f = GridFunction1D::from_fn(GridSpec::new(-3.0, 3.0, 121).unwrap(), |x| (3.0 * x).sin() + 0.3 * x * x)
            .unwrap();
        let dual = GridSpec::new(-5.0, 5.0, 97).unwrap();
        let g = llt_1d(&f, dual).unwrap();
        for (a, b) in g.values().iter().zip(brute(&f, dual)) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn csv_round_trip_with_infinity() {
        let f = GridFunction1D::new(-1.0, 2.0, vec![f64::INFINITY, 0.25, -1.5, f64::INFINITY]).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("x,value\n"));
        assert!(text.contains(",inf"));
        assert_eq!(GridFunction1D::from_csv(&text).unwrap(), f);
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(GridFunction1D::new(0.0, 1.0, vec![1.0]), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            GridFunction1D::new(0.0, 1.0, vec![f64::INFINITY; 3]),
            Err(Error::EmptyDomain)
        ));
        assert!(GridFunction1D::new(0.0, 1.0, vec![1.0, f64::INFINITY, 1.0]).is_err());
        assert!(GridFunction1D::from_csv("x,y\n0,1\n1,2\n").is_err());
        assert!(GridFunction1D::from_csv("x,value\n0,1\n1,2\n5,3\n").is_err());
    }

    #[test]
    fn interpolation_and_trapezoid() {
        let f = GridFunction1D::from_fn(GridSpec::new(0.0, 2.0, 5).unwrap(), |x| 2.0 * x + 1.0).unwrap();
        assert_eq!(f.interpolate(0.75), Some(2.5));
        assert_eq!(f.interpolate(2.5), None);
        assert!((f.trapezoid() - 6.0).abs() < 1e-14);
    }
}
