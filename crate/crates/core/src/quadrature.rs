//! Composite Gauss-Legendre rules on axis-aligned boxes (dimension ≤ 2 in
//! practice) and compensated summation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per Gauss-Legendre panel.
pub const PANEL_NODES: usize = 32;

/// Gauss-Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // three-term recurrence for P_n and P_n'
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The shared 32-point rule.
    pub fn panel() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_NODES))
    }

    /// ∫_a^b f by this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(mid + half * x));
        }
        s.total() * half
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = NeumaierSum::default();
    for v in values {
        s.add(v);
    }
    s.total()
}

/// Tensor-product composite rule on the cube `center ± half_width`.
#[derive(Debug, Clone)]
pub struct BoxRule {
    dim: usize,
    center: Vec<f64>,
    half_width: f64,
    panels: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl BoxRule {
    pub fn new(center: &[f64], half_width: f64, panels: usize) -> Self {
        Self::with_rule(center, half_width, panels, GaussLegendre::panel())
    }

    pub fn with_rule(center: &[f64], half_width: f64, panels: usize, rule: &GaussLegendre) -> Self {
        let dim = center.len();
        assert!(dim >= 1 && panels >= 1 && half_width > 0.0);
        let panel_w = 2.0 * half_width / panels as f64;
        // 1D offsets and weights relative to the center
        let mut off = Vec::with_capacity(panels * rule.nodes.len());
        let mut wts = Vec::with_capacity(off.capacity());
        for k in 0..panels {
            let a = -half_width + k as f64 * panel_w;
            let mid = a + 0.5 * panel_w;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                off.push(mid + 0.5 * panel_w * x);
                wts.push(0.5 * panel_w * w);
            }
        }
        let m = off.len();
        let total = m.pow(dim as u32);
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                points.push(center[d] + off[i]);
                w *= wts[i];
            }
            weights.push(w);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < m {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self {
            dim,
            center: center.to_vec(),
            half_width,
            panels,
            points,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn center(&self) -> &[f64] {
        &self.center
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn panels(&self) -> usize {
        self.panels
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.iter() {
            s.add(w * f(x));
        }
        s.total()
    }

    /// Same box, panel count doubled.
    pub fn refined(&self) -> Self {
        Self::new(&self.center, self.half_width, self.panels * 2)
    }
}

/// Probe directions for radius searches: ±eᵢ, plus the diagonals in 2D.
pub(crate) fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[d] = sign;
            dirs.push(e);
        }
    }
    if dim == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in [(s, s), (s, -s), (-s, s), (-s, -s)] {
            dirs.push(vec![a, b]);
        }
    }
    dirs
}

/// Smallest radius (up to bisection accuracy) beyond which `rise`, a function
/// vanishing at `center` and growing outward, exceeds `gap` along every probe
/// direction.
pub(crate) fn decay_radius(center: &[f64], rise: impl Fn(&[f64]) -> f64, gap: f64) -> Result<f64> {
    let mut radius: f64 = 0.0;
    for e in probe_directions(center.len()) {
        let at = |r: f64| {
            let x: Vec<f64> = center.iter().zip(&e).map(|(c, v)| c + r * v).collect();
            rise(&x)
        };
        let mut r = 1.0;
        while !(at(r) >= gap) {
            r *= 2.0;
            if r > 1e8 {
                return Err(Error::Quadrature(format!("integrand does not decay along {e:?}")));
            }
        }
        let (mut lo, mut hi) = (0.0, r);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if at(mid) >= gap {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        radius = radius.max(hi);
    }
    Ok(radius)
}
