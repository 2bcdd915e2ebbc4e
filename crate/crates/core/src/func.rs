//! Smooth scalar fields on ℝⁿ and the test-function families used by the
//! verifiers (bumps, tilts, sine perturbations, potential-shaped extremals).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::potential::Potential;

/// A C² scalar field with value, gradient and Hessian oracles.
///
/// The default Hessian is a central difference of the gradient; override it
/// when a closed form is available.
pub trait SmoothFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;

    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut h = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            let step = 1e-5 * (1.0 + x[j].abs());
            xp[j] = x[j] + step;
            let gp = self.grad(&xp);
            xp[j] = x[j] - step;
            let gm = self.grad(&xp);
            xp[j] = x[j];
            for i in 0..n {
                h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        // symmetrize
        let ht = h.transpose();
        (h + ht) * 0.5
    }
}

impl fmt::Debug for dyn SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothFn(dim={})", self.dim())
    }
}

impl<T: SmoothFn + ?Sized> SmoothFn for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad(x)
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).hess(x)
    }
}

impl<T: SmoothFn + ?Sized> SmoothFn for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (**self).grad(x)
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).hess(x)
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// g(x) = c.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl Constant {
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value }
    }
}

impl SmoothFn for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// g(x) = θ·x + offset.
#[derive(Debug, Clone)]
pub struct Linear {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl Linear {
    pub fn new(slope: Vec<f64>, offset: f64) -> Self {
        Self { slope, offset }
    }

    pub fn scalar(theta: f64) -> Self {
        Self::new(vec![theta], 0.0)
    }
}

impl SmoothFn for Linear {
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.offset + self.slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
    fn grad(&self, _x: &[f64]) -> Vec<f64> {
        self.slope.clone()
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// Gaussian bump g(x) = a·exp(−‖x − c‖²/w²).
#[derive(Debug, Clone)]
pub struct Bump {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

impl Bump {
    pub fn new(amplitude: f64, center: Vec<f64>, width: f64) -> Self {
        Self {
            amplitude,
            center,
            width,
        }
    }

    pub fn scalar(amplitude: f64, center: f64, width: f64) -> Self {
        Self::new(amplitude, vec![center], width)
    }

    fn envelope(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let e = self.amplitude * (-norm_sq(&d) / (self.width * self.width)).exp();
        (d, e)
    }
}

impl SmoothFn for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.envelope(x).1
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let (d, e) = self.envelope(x);
        let k = -2.0 / (self.width * self.width);
        d.iter().map(|di| k * di * e).collect()
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let (d, e) = self.envelope(x);
        let k = -2.0 / (self.width * self.width);
        let n = d.len();
        DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            e * (k * delta + k * k * d[i] * d[j])
        })
    }
}

/// g(x) = a·sin(x₁)·exp(−‖x‖²/w²): an odd, localized oscillation.
#[derive(Debug, Clone)]
pub struct SineBump {
    pub dim: usize,
    pub amplitude: f64,
    pub width: f64,
}

impl SineBump {
    pub fn new(dim: usize, amplitude: f64, width: f64) -> Self {
        Self {
            dim,
            amplitude,
            width,
        }
    }
}

impl SmoothFn for SineBump {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * x[0].sin() * (-norm_sq(x) / (self.width * self.width)).exp()
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let w2 = self.width * self.width;
        let env = self.amplitude * (-norm_sq(x) / w2).exp();
        let s = x[0].sin();
        let mut g: Vec<f64> = x.iter().map(|xi| env * s * (-2.0 * xi / w2)).collect();
        g[0] += env * x[0].cos();
        g
    }
}

/// U(x) = a·Σᵢ sin(f·xᵢ): bounded perturbation with osc = 2|a|·n.
#[derive(Debug, Clone)]
pub struct Sine {
    pub dim: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Sine {
    pub fn new(dim: usize, amplitude: f64, frequency: f64) -> Self {
        Self {
            dim,
            amplitude,
            frequency,
        }
    }
}

impl SmoothFn for Sine {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * x.iter().map(|v| (self.frequency * v).sin()).sum::<f64>()
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|v| self.amplitude * self.frequency * (self.frequency * v).cos())
            .collect()
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let f2 = self.frequency * self.frequency;
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            x.len(),
            x.iter().map(|v| -self.amplitude * f2 * (self.frequency * v).sin()),
        ))
    }
}

/// g(x) = offset − b·φ(x − x̄), the extremal family of the Euclidean inequalities.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    pub potential: Potential,
    pub center: Vec<f64>,
    pub scale: f64,
    pub offset: f64,
}

impl PotentialProfile {
    pub fn new(potential: Potential, center: Vec<f64>, scale: f64, offset: f64) -> Self {
        Self {
            potential,
            center,
            scale,
            offset,
        }
    }

    fn shifted(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| a - c).collect()
    }
}

impl SmoothFn for PotentialProfile {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.offset - self.scale * self.potential.value(&self.shifted(x))
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.potential
            .grad(&self.shifted(x))
            .into_iter()
            .map(|v| -self.scale * v)
            .collect()
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        self.potential.hess(&self.shifted(x)) * (-self.scale)
    }
}

/// Pointwise sum of smooth fields.
#[derive(Clone)]
pub struct Sum(pub Vec<Arc<dyn SmoothFn>>);

impl SmoothFn for Sum {
    fn dim(&self) -> usize {
        self.0.first().map_or(1, |f| f.dim())
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|f| f.value(x)).sum()
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for f in &self.0 {
            for (gi, v) in g.iter_mut().zip(f.grad(x)) {
                *gi += v;
            }
        }
        g
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for f in &self.0 {
            h += f.hess(x);
        }
        h
    }
}

/// c·f(x).
#[derive(Clone)]
pub struct Scaled<F> {
    pub factor: f64,
    pub inner: F,
}

impl<F: SmoothFn> Scaled<F> {
    pub fn new(factor: f64, inner: F) -> Self {
        Self { factor, inner }
    }
}

impl<F: SmoothFn> SmoothFn for Scaled<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.inner
            .grad(x)
            .into_iter()
            .map(|v| self.factor * v)
            .collect()
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        self.inner.hess(x) * self.factor
    }
}

/// f(x) + c.
#[derive(Clone)]
pub struct Offset<F> {
    pub inner: F,
    pub offset: f64,
}

impl<F: SmoothFn> SmoothFn for Offset<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) + self.offset
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.inner.grad(x)
    }
    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        self.inner.hess(x)
    }
}

/// A smooth field built from closures. The Hessian falls back to finite
/// differences of the gradient.
pub struct FnField<V, G> {
    dim: usize,
    value: V,
    grad: G,
}

impl<V, G> FnField<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: V, grad: G) -> Self {
        Self { dim, value, grad }
    }
}

impl<V, G> SmoothFn for FnField<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(f: &dyn SmoothFn, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let h = 1e-6;
            xp[i] = x[i] + h;
            let a = f.value(&xp);
            xp[i] = x[i] - h;
            let b = f.value(&xp);
            xp[i] = x[i];
            out.push((a - b) / (2.0 * h));
        }
        out
    }

    #[test]
    fn bump_gradient_matches_finite_difference() {
        let b = Bump::new(0.3, vec![0.5, -0.2], 0.8);
        for x in [[0.1, 0.2], [1.0, -1.0], [0.5, -0.2]] {
            let g = b.grad(&x);
            let fd = fd_grad(&b, &x);
            for (a, c) in g.iter().zip(&fd) {
                assert!((a - c).abs() < 1e-8, "{a} vs {c}");
            }
        }
    }

    #[test]
    fn bump_hessian_matches_default_fd() {
        let b = Bump::scalar(0.4, 0.3, 0.7);
        let x = [0.9];
        let exact = b.hess(&x)[(0, 0)];
        let fd = FnField::new(1, |x: &[f64]| b.value(x), |x: &[f64]| b.grad(x)).hess(&x)[(0, 0)];
        assert!((exact - fd).abs() < 1e-6);
    }

    #[test]
    fn sine_bump_gradient() {
        let s = SineBump::new(1, 0.2, 1.5);
        for x in [-1.3, 0.0, 0.4, 2.2] {
            let g = s.grad(&[x])[0];
            let fd = fd_grad(&s, &[x])[0];
            assert!((g - fd).abs() < 1e-8);
        }
    }
}
