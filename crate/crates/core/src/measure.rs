//! Normalized log-concave probability measures μ = e^{−φ}dx on a truncated
//! box, with entropy and variance functionals and 1D inverse-CDF sampling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conjugate::grad_inverse;
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::potential::Potential;
use crate::quadrature::{decay_radius, BoxRule, GaussLegendre, NeumaierSum};
use crate::regularity::check_convexity;

pub const DEFAULT_ACCURACY: f64 = 1e-10;

/// log(1e20): the integrand is cut where it has dropped this far below its peak.
const TAIL_GAP: f64 = 46.0;
const BOUNDARY_RATIO: f64 = 1e-16;
const MAX_RADIUS: f64 = 1e6;
const PARALLEL_THRESHOLD: usize = 4096;
const QUANTILE_KNOTS: usize = 4096;

/// Where and how finely a measure is discretized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub center: Vec<f64>,
    /// Half-width of the truncation box.
    pub radius: f64,
    /// Panels per axis.
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl QuadratureSpec {
    pub fn rule(&self) -> BoxRule {
        BoxRule::new(&self.center, self.radius, self.panels)
    }

    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            ..self.clone()
        }
    }
}

/// log ∫ e^{h} over a box, plus the box it was computed on.
#[derive(Debug, Clone)]
pub struct LogIntegral {
    pub log_value: f64,
    pub spec: QuadratureSpec,
}

pub(crate) fn eval_nodes(rule: &BoxRule, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    if rule.len() >= PARALLEL_THRESHOLD {
        (0..rule.len()).into_par_iter().map(|i| f(rule.point(i))).collect()
    } else {
        rule.iter().map(|(x, _)| f(x)).collect()
    }
}

fn log_sum(rule: &BoxRule, h: &[f64]) -> Result<f64> {
    if let Some(i) = h.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFinite(format!("log-integrand at {:?}", rule.point(i))));
    }
    let m = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::INFINITY {
        return Err(Error::Overflow("log-integrand is +inf".into()));
    }
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let mut s = NeumaierSum::default();
    for (w, v) in rule.weights().iter().zip(h) {
        s.add(w * (v - m).exp());
    }
    Ok(m + s.total().ln())
}

fn boundary_points(spec: &QuadratureSpec) -> Vec<Vec<f64>> {
    let (c, r) = (&spec.center, spec.radius);
    if c.len() == 1 {
        return vec![vec![c[0] - r], vec![c[0] + r]];
    }
    let mut pts = Vec::new();
    for k in 0..=64 {
        let t = -r + 2.0 * r * k as f64 / 64.0;
        for s in [-r, r] {
            pts.push(vec![c[0] + s, c[1] + t]);
            pts.push(vec![c[0] + t, c[1] + s]);
        }
    }
    pts
}

/// log ∫ e^{h(x)} dx for h decaying to −∞ away from `center`, which should be
/// near the peak of h. The box starts where h has dropped by 46 and doubles
/// while the boundary integrand exceeds 1e−16 of the total; the panel width
/// halves until the relative change is at most `accuracy`.
pub fn log_integral_exp(
    center: &[f64],
    h: impl Fn(&[f64]) -> f64 + Sync,
    accuracy: f64,
) -> Result<LogIntegral> {
    let dim = center.len();
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidArgument(format!("quadrature supports dimension 1 or 2, got {dim}")));
    }
    let peak = h(center);
    if !peak.is_finite() {
        return Err(Error::NonFinite(format!("log-integrand at the center {center:?}")));
    }
    let mut radius = decay_radius(center, |x| peak - h(x), TAIL_GAP)?;
    let max_nodes_per_axis = if dim == 1 { 1 << 20 } else { 4096 };
    let mut width = if dim == 1 { 1.0 } else { 2.0 };
    loop {
        let mut panels = 2 * (radius / width).ceil().max(1.0) as usize;
        let mut spec = QuadratureSpec {
            center: center.to_vec(),
            radius,
            panels,
            nodes_per_panel: GaussLegendre::panel().nodes.len(),
        };
        let mut coarse = log_sum(&spec.rule(), &eval_nodes(&spec.rule(), &h))?;
        loop {
            let fine_spec = spec.refined();
            if fine_spec.panels * fine_spec.nodes_per_panel > max_nodes_per_axis {
                return Err(Error::Quadrature(format!(
                    "no convergence with {} panels on radius {radius}",
                    spec.panels
                )));
            }
            let rule = fine_spec.rule();
            let fine = log_sum(&rule, &eval_nodes(&rule, &h))?;
            if (fine - coarse).exp_m1().abs() <= accuracy {
                break;
            }
            panels *= 2;
            spec = fine_spec;
            coarse = fine;
        }
        width = 2.0 * radius / panels as f64;
        let edge = boundary_points(&spec)
            .iter()
            .map(|x| h(x))
            .fold(f64::NEG_INFINITY, f64::max);
        if edge - coarse < BOUNDARY_RATIO.ln() {
            return Ok(LogIntegral {
                log_value: coarse,
                spec,
            });
        }
        radius *= 2.0;
        if radius > MAX_RADIUS {
            return Err(Error::Quadrature(format!(
                "boundary integrand still above 1e-16 of the total at radius {MAX_RADIUS}"
            )));
        }
    }
}

/// Cumulative distribution of a 1D density on [lo, hi], tabulated per panel so
/// that both tails are resolved: `cdf` sums from the left, `sf` from the right.
#[derive(Clone)]
pub struct Cumulative1D {
    lo: f64,
    width: f64,
    /// left[k] = mass of panels 0..k, right[k] = mass of panels k.. (normalized)
    left: Vec<f64>,
    right: Vec<f64>,
    total: f64,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Cumulative1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cumulative1D")
            .field("lo", &self.lo)
            .field("width", &self.width)
            .field("panels", &(self.left.len() - 1))
            .field("total", &self.total)
            .finish()
    }
}

impl Cumulative1D {
    /// `density` need not be normalized; `total` is computed here.
    pub fn new(
        lo: f64,
        hi: f64,
        panels: usize,
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if !(lo < hi) || panels == 0 {
            return Err(Error::InvalidArgument(format!("bad cumulative range [{lo}, {hi}]")));
        }
        let width = (hi - lo) / panels as f64;
        let rule = GaussLegendre::panel();
        let masses: Vec<f64> = (0..panels)
            .map(|k| {
                let a = lo + k as f64 * width;
                rule.integrate(a, a + width, |x| density(x))
            })
            .collect();
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::NonFinite("density must be finite and nonnegative".into()));
        }
        let mut left = vec![0.0; panels + 1];
        let mut acc = NeumaierSum::default();
        for k in 0..panels {
            acc.add(masses[k]);
            left[k + 1] = acc.total();
        }
        let mut right = vec![0.0; panels + 1];
        let mut acc = NeumaierSum::default();
        for k in (0..panels).rev() {
            acc.add(masses[k]);
            right[k] = acc.total();
        }
        let total = left[panels];
        if !(total > 0.0) {
            return Err(Error::Quadrature("density has zero mass".into()));
        }
        for v in left.iter_mut().chain(right.iter_mut()) {
            *v /= total;
        }
        Ok(Self {
            lo,
            width,
            left,
            right,
            total,
            density,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * (self.left.len() - 1) as f64
    }

    /// Normalized density.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi() {
            0.0
        } else {
            (self.density)(x) / self.total
        }
    }

    fn panel_of(&self, x: f64) -> usize {
        (((x - self.lo) / self.width).floor() as usize).min(self.left.len() - 2)
    }

    fn partial(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        GaussLegendre::panel().integrate(a, b, |t| (self.density)(t)) / self.total
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let k = self.panel_of(x);
        let a = self.lo + k as f64 * self.width;
        self.left[k] + self.partial(a, x)
    }

    /// Survival function 1 − cdf, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 1.0;
        }
        if x >= self.hi() {
            return 0.0;
        }
        let k = self.panel_of(x);
        let b = self.lo + (k + 1) as f64 * self.width;
        self.right[k + 1] + self.partial(x, b)
    }

    /// Inverse of the CDF. Levels above 1/2 are solved on the survival
    /// function so upper-tail quantiles keep full relative accuracy.
    pub fn quantile(&self, p: f64) -> f64 {
        if p > 0.5 {
            self.solve(1.0 - p, true)
        } else {
            self.solve(p, false)
        }
    }

    /// The x with sf(x) = `s`.
    pub fn quantile_sf(&self, s: f64) -> f64 {
        if s < 0.5 {
            self.solve(s, true)
        } else {
            self.solve(1.0 - s, false)
        }
    }

    fn solve(&self, target: f64, upper: bool) -> f64 {
        if target <= 0.0 {
            return if upper { self.hi() } else { self.lo };
        }
        if target >= 1.0 {
            return if upper { self.lo } else { self.hi() };
        }
        let n = self.left.len() - 1;
        let k = if upper {
            // right[k] ≥ target > right[k+1]
            self.right.partition_point(|&v| v >= target).saturating_sub(1).min(n - 1)
        } else {
            self.left.partition_point(|&v| v < target).saturating_sub(1).min(n - 1)
        };
        let (mut a, mut b) = (self.lo + k as f64 * self.width, self.lo + (k + 1) as f64 * self.width);
        // increasing in x in both cases
        let resid = |x: f64| {
            if upper {
                target - self.sf(x)
            } else {
                self.cdf(x) - target
            }
        };
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            let r = resid(x);
            if r == 0.0 {
                return x;
            }
            if r > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let d = self.pdf(x);
            let mut next = x - r / d;
            if !(next > a && next < b) || !d.is_finite() || d <= 0.0 {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || b - a <= 1e-15 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }
}

/// A normalized measure e^{−φ}dx on the box described by `spec`.
#[derive(Debug, Clone)]
pub struct Measure {
    potential: Potential,
    log_z: f64,
    accuracy: f64,
    spec: QuadratureSpec,
    rule: BoxRule,
    /// Quadrature weight times normalized density at each node.
    mass: Vec<f64>,
    cumulative: Option<Cumulative1D>,
    quantiles: Option<Pchip>,
}

/// Normalize e^{−φ} by quadrature and fold log Z into the shift of φ.
pub fn build_measure(potential: &Potential, accuracy: f64) -> Result<Measure> {
    if !(accuracy > 0.0 && accuracy <= 1e-4) {
        return Err(Error::InvalidArgument(format!("accuracy must lie in (0, 1e-4], got {accuracy}")));
    }
    let dim = potential.dim();
    if dim > 2 {
        return Err(Error::InvalidArgument(format!(
            "measures are supported in dimension 1 or 2, got {dim}"
        )));
    }
    check_convexity(potential)?;
    let center = grad_inverse(potential, &vec![0.0; dim])?;
    build_measure_at(potential, &center, accuracy)
}

/// Build without the convexity probes, with the quadrature box centered at
/// `center` (which should be near the minimum of φ). Used for perturbed
/// potentials φ + U that need not be convex themselves.
pub fn build_measure_at(potential: &Potential, center: &[f64], accuracy: f64) -> Result<Measure> {
    if !(accuracy > 0.0 && accuracy <= 1e-4) {
        return Err(Error::InvalidArgument(format!("accuracy must lie in (0, 1e-4], got {accuracy}")));
    }
    potential.check_dim(center)?;
    let li = log_integral_exp(center, |x| -potential.value(x), accuracy)?;
    let normalized = potential.clone().with_shift(potential.shift() + li.log_value);
    Measure::assemble(normalized, li.log_value, accuracy, li.spec)
}

impl Measure {
    fn assemble(potential: Potential, log_z: f64, accuracy: f64, spec: QuadratureSpec) -> Result<Self> {
        let rule = spec.rule();
        let mass: Vec<f64> = eval_nodes(&rule, |x| (-potential.value(x)).exp())
            .into_iter()
            .zip(rule.weights())
            .map(|(d, w)| d * w)
            .collect();
        let (cumulative, quantiles) = if potential.dim() == 1 {
            let p = potential.clone();
            let c = spec.center[0];
            let cum = Cumulative1D::new(
                c - spec.radius,
                c + spec.radius,
                spec.panels,
                Arc::new(move |x| (-p.value(&[x])).exp()),
            )?;
            let table = quantile_table(&cum)?;
            (Some(cum), Some(table))
        } else {
            (None, None)
        };
        Ok(Self {
            potential,
            log_z,
            accuracy,
            spec,
            rule,
            mass,
            cumulative,
            quantiles,
        })
    }

    /// Same normalization, twice the panels per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::assemble(self.potential.clone(), self.log_z, self.accuracy, self.spec.refined())
    }

    /// The normalized potential (∫e^{−φ}dx = 1).
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    /// Normalization ∫e^{−φ}dx of the potential as given to [`build_measure`].
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn rule(&self) -> &BoxRule {
        &self.rule
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Quadrature nodes with their probability mass.
    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.mass.len()).map(|i| (self.rule.point(i), self.mass[i]))
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Normalized density e^{−φ(x)}.
    pub fn density(&self, x: &[f64]) -> f64 {
        (-self.potential.value(x)).exp()
    }

    /// Evaluate `f` at every node (in parallel for large grids, order preserved).
    pub fn map_nodes(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        eval_nodes(&self.rule, f)
    }

    /// Fallible per-node evaluation; the first error in node order wins.
    pub fn try_map_nodes(&self, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<Vec<f64>> {
        if self.len() >= PARALLEL_THRESHOLD {
            (0..self.len()).into_par_iter().map(|i| f(self.rule.point(i))).collect()
        } else {
            self.rule.iter().map(|(x, _)| f(x)).collect()
        }
    }

    /// Σ mass·value, rejecting non-finite node values.
    pub fn sum_weighted(&self, values: &[f64]) -> Result<f64> {
        let mut s = NeumaierSum::default();
        for (i, (v, m)) in values.iter().zip(&self.mass).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand at {:?}", self.rule.point(i))));
            }
            s.add(m * v);
        }
        Ok(s.total())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        self.sum_weighted(&self.map_nodes(f))
    }

    /// log ∫e^g dμ with max-shift stabilization.
    pub fn log_mean_exp(&self, g: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        log_mean_exp_values(&self.mass, &self.map_nodes(g))
    }

    /// Ent_μ(e^g) = ∫e^g log(e^g/∫e^g dμ) dμ.
    pub fn entropy(&self, g: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        entropy_values(&self.mass, &self.map_nodes(g))
    }

    /// ∫(g − ∫g dμ)² dμ.
    pub fn variance(&self, g: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
        let vals = self.map_nodes(g);
        let mean = self.sum_weighted(&vals)?;
        let centered: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
        Ok(self.sum_weighted(&centered)?.max(0.0))
    }

    pub fn cumulative(&self) -> Option<&Cumulative1D> {
        self.cumulative.as_ref()
    }

    fn require_1d(&self) -> Result<&Cumulative1D> {
        self.cumulative.as_ref().ok_or(Error::DimensionMismatch {
            expected: 1,
            got: self.dim(),
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.require_1d()?.cdf(x))
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.require_1d()?.sf(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.require_1d()?.quantile(p))
    }

    /// Knots (probability, abscissa) of the sampling table.
    pub fn quantile_table(&self) -> Option<(&[f64], &[f64])> {
        self.quantiles.as_ref().map(|t| t.knots())
    }

    /// `count` draws by inverse-CDF sampling from the seeded stream 0.
    pub fn sample_1d(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        self.sample_1d_stream(count, seed, 0)
    }

    /// Draws from an independent ChaCha stream, for per-coordinate sampling.
    pub fn sample_1d_stream(&self, count: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
        let cum = self.require_1d()?;
        let table = self.quantiles.as_ref().expect("1D measures carry a quantile table");
        let (ps, _) = table.knots();
        let (pmin, pmax) = (ps[0], ps[ps.len() - 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u: f64 = rng.random();
            if u <= 0.0 {
                continue;
            }
            let x = if u < pmin || u > pmax {
                cum.quantile(u)
            } else {
                table.eval(u)
            };
            out.push(x);
        }
        Ok(out)
    }
}

fn quantile_table(cum: &Cumulative1D) -> Result<Pchip> {
    let mut ps: Vec<f64> = (1..QUANTILE_KNOTS).map(|j| j as f64 / QUANTILE_KNOTS as f64).collect();
    for k in 5..=12 {
        let t = 10f64.powi(-k);
        ps.push(t);
        ps.push(1.0 - t);
    }
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let xs: Vec<f64> = ps.iter().map(|&p| cum.quantile(p)).collect();
    // keep strictly increasing knots only
    let mut kp = Vec::with_capacity(ps.len());
    let mut kx = Vec::with_capacity(ps.len());
    for (p, x) in ps.into_iter().zip(xs) {
        if kx.last().is_none_or(|&l| x > l) {
            kp.push(p);
            kx.push(x);
        }
    }
    Pchip::new(kp, kx)
}

pub(crate) fn log_mean_exp_values(mass: &[f64], g: &[f64]) -> Result<f64> {
    if let Some(v) = g.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("exponent {v}")));
    }
    let m = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = NeumaierSum::default();
    for (w, v) in mass.iter().zip(g) {
        s.add(w * (v - m).exp());
    }
    Ok(m + s.total().ln())
}

/// Ent from node masses and exponents, as e^L·Σ mass·(u·e^u − expm1(u)) with
/// u = g − L. Each term is nonnegative, so no cancellation happens.
pub(crate) fn entropy_values(mass: &[f64], g: &[f64]) -> Result<f64> {
    let l = log_mean_exp_values(mass, g)?;
    let mut s = NeumaierSum::default();
    for (w, v) in mass.iter().zip(g) {
        let u = v - l;
        let t = if u > 700.0 {
            return Err(Error::Overflow(format!("e^g overflows after stabilization (u = {u})")));
        } else {
            u * u.exp() - u.exp_m1()
        };
        s.add(w * t);
    }
    let scale = l.exp();
    if !scale.is_finite() {
        return Err(Error::Overflow(format!("∫e^g dμ = e^{l} overflows")));
    }
    Ok(scale * s.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian() -> Measure {
        build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY).unwrap()
    }

    #[test]
    fn gaussian_normalization() {
        let m = gaussian();
        assert!((m.z() - (2.0 * PI).sqrt()).abs() < 1e-10, "{}", m.z());
        assert!((m.integrate(|_| 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((m.integrate(|x| x[0] * x[0]).unwrap() - 1.0).abs() < 1e-8);
        assert!(m.integrate(|x| x[0]).unwrap().abs() < 1e-10);
        assert!((m.potential().value(&[0.0]) - 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn absolute_value_is_rejected() {
        let err = build_measure(&Potential::power(1, 1.0).unwrap(), DEFAULT_ACCURACY).unwrap_err();
        assert!(err.is_hypothesis(), "{err}");
    }

    #[test]
    fn quartic_normalization_is_stable() {
        let m = build_measure(&Potential::quartic(), DEFAULT_ACCURACY).unwrap();
        let fine = m.refined().unwrap();
        assert!((m.integrate(|_| 1.0).unwrap() - 1.0).abs() <= 1e-8);
        assert!((fine.integrate(|_| 1.0).unwrap() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn entropy_of_linear_tilt() {
        let m = gaussian();
        assert!(m.entropy(|_| 3.0).unwrap().abs() < 1e-14);
        let e = m.entropy(|x| x[0]).unwrap();
        assert!((e - 0.5 * 0.5f64.exp()).abs() < 1e-10, "{e}");
        let e2 = m.entropy(|x| 0.25 * x[0] * x[0]).unwrap();
        let e2f = m.refined().unwrap().entropy(|x| 0.25 * x[0] * x[0]).unwrap();
        assert!((e2 - e2f).abs() < 1e-8);
    }

    #[test]
    fn gaussian_variances() {
        let m = gaussian();
        assert!(m.variance(|_| 7.0).unwrap().abs() < 1e-15);
        assert!((m.variance(|x| x[0]).unwrap() - 1.0).abs() < 1e-8);
        assert!((m.variance(|x| x[0] * x[0]).unwrap() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn overflowing_exponent_is_reported() {
        let m = gaussian();
        assert!(matches!(m.entropy(|x| x[0].powi(4) * 1e4), Err(Error::Overflow(_))));
        assert!(matches!(m.integrate(|_| f64::NAN), Err(Error::NonFinite(_))));
    }

    #[test]
    fn cdf_and_quantile_are_inverse() {
        let m = gaussian();
        assert!((m.cdf(0.0).unwrap() - 0.5).abs() < 1e-14);
        for p in [1e-9, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = m.quantile(p).unwrap();
            let back = if p > 0.5 { 1.0 - m.sf(x).unwrap() } else { m.cdf(x).unwrap() };
            assert!((back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-3), "{p} {x}");
        }
        let (ps, xs) = m.quantile_table().unwrap();
        assert!(ps.windows(2).all(|w| w[1] > w[0]));
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sampling_is_deterministic_and_centered() {
        let m = gaussian();
        let a = m.sample_1d(100_000, 42).unwrap();
        let b = m.sample_1d(100_000, 42).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!(mean.abs() <= 0.02, "{mean}");
        let c = m.sample_1d_stream(10, 42, 1).unwrap();
        assert_ne!(&a[..10], &c[..]);
    }

    #[test]
    fn sampling_requires_one_dimension() {
        let m = build_measure(&Potential::gaussian(2), 1e-8).unwrap();
        assert!(matches!(m.sample_1d(10, 1), Err(Error::DimensionMismatch { .. })));
        assert!((m.integrate(|x| x[0] * x[0] + x[1] * x[1]).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn perturbed_measure_is_off_center() {
        let p = Potential::perturbed_sine(Potential::gaussian(1), 0.1);
        let m = build_measure(&p, DEFAULT_ACCURACY).unwrap();
        assert!((m.integrate(|_| 1.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(m.integrate(|x| x[0]).unwrap() < 0.0);
    }
}
