//! Bregman-cost transport in one dimension:
//!
//! W_L(F dμ, μ) ≤ Ent_μ(F),   L(x, y) = φ(y) − φ(x) − (y − x)·φ'(x) ≥ 0.
//!
//! ∂²L/∂x∂y = −φ''(x) < 0, so the monotone (quantile) coupling is optimal and
//! W_L = ∫₀¹ L(Q_F(t), Q_μ(t)) dt.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{entropy_values, log_mean_exp_values, Cumulative1D, Measure};
use crate::potential::Potential;
use crate::report::{at_two_resolutions, VerificationReport};

pub type LogDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A 1D measure μ and a density F with ∫F dμ = 1, stored as log F.
#[derive(Clone)]
pub struct TransportInstance {
    measure: Measure,
    log_f: LogDensity,
    /// log ∫e^{log_f} dμ before renormalization.
    log_norm: f64,
}

impl std::fmt::Debug for TransportInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportInstance")
            .field("measure", &self.measure)
            .field("log_norm", &self.log_norm)
            .finish()
    }
}

/// L(x, y) = φ(y) − φ(x) − (y − x)·φ'(x).
pub fn bregman_cost(phi: &Potential, x: f64, y: f64) -> f64 {
    phi.value(&[y]) - phi.value(&[x]) - (y - x) * phi.grad(&[x])[0]
}

impl TransportInstance {
    /// `log_f` is any log-density; it is renormalized against `measure`.
    pub fn new(measure: Measure, log_f: LogDensity) -> Result<Self> {
        if measure.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: measure.dim() });
        }
        let vals = measure.map_nodes(|x| log_f(x[0]));
        let log_norm = log_mean_exp_values(measure.masses(), &vals)?;
        Ok(Self { measure, log_f, log_norm })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Normalized F.
    pub fn density(&self, x: f64) -> f64 {
        ((self.log_f)(x) - self.log_norm).exp()
    }

    pub fn log_normalization(&self) -> f64 {
        self.log_norm
    }

    /// ∫F dμ on the stored quadrature.
    pub fn mass(&self) -> Result<f64> {
        self.measure.integrate(|x| self.density(x[0]))
    }

    /// Cumulative distribution of F dμ on the box of `measure`.
    fn target_cdf(&self, measure: &Measure) -> Result<Cumulative1D> {
        let spec = measure.quadrature();
        let (c, r) = (spec.center[0], spec.radius);
        let phi = measure.potential().clone();
        let log_f = self.log_f.clone();
        Cumulative1D::new(c - r, c + r, spec.panels, Arc::new(move |x| (log_f(x) - phi.value(&[x])).exp()))
    }

    /// Image T(y) of y under the monotone map pushing μ to F dμ.
    fn transport_map<'a>(&self, measure: &'a Measure, target: &'a Cumulative1D) -> impl Fn(f64) -> f64 + 'a {
        let source = measure.cumulative().expect("1D measure");
        move |y| {
            let p = source.cdf(y);
            if p <= 0.5 {
                target.quantile(p)
            } else {
                target.quantile_sf(source.sf(y))
            }
        }
    }

    fn sides(&self, measure: &Measure) -> Result<(f64, f64)> {
        let target = self.target_cdf(measure)?;
        let t = self.transport_map(measure, &target);
        let phi = measure.potential();
        let cost = measure.map_nodes(|y| bregman_cost(phi, t(y[0]), y[0]));
        if let Some(c) = cost.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("transport cost {c}")));
        }
        let w = measure.sum_weighted(&cost)?;
        let lf = measure.map_nodes(|x| (self.log_f)(x[0]));
        let l = log_mean_exp_values(measure.masses(), &lf)?;
        let lf: Vec<f64> = lf.iter().map(|v| v - l).collect();
        Ok((w, entropy_values(measure.masses(), &lf)?))
    }

    /// `atoms` equal-mass quantile points of F dμ and of μ at levels (k + ½)/atoms.
    pub fn discretize(&self, atoms: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if atoms == 0 {
            return Err(Error::InvalidArgument("need at least one atom".into()));
        }
        let target = self.target_cdf(&self.measure)?;
        let source = self.measure.cumulative().expect("1D measure");
        let levels: Vec<f64> = (0..atoms).map(|k| (k as f64 + 0.5) / atoms as f64).collect();
        Ok((
            levels.iter().map(|&p| target.quantile(p)).collect(),
            levels.iter().map(|&p| source.quantile(p)).collect(),
        ))
    }
}

/// Cost of pairing the k-th smallest x with the k-th smallest y, averaged.
pub fn monotone_coupling_cost(xs: &[f64], ys: &[f64], cost: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidArgument("coupling needs two nonempty samples of equal size".into()));
    }
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    Ok(xs.iter().zip(&ys).map(|(&x, &y)| cost(x, y)).sum::<f64>() / xs.len() as f64)
}

/// W_L(F dμ, μ) by the quantile coupling, on the measure's quadrature.
pub fn wasserstein_bregman_1d(instance: &TransportInstance) -> Result<f64> {
    Ok(instance.sides(&instance.measure)?.0)
}

pub fn verify_transport(instance: &TransportInstance) -> Result<VerificationReport> {
    let (c, f) = at_two_resolutions(&instance.measure, |m| instance.sides(m))?;
    Ok(VerificationReport::two_resolution("transport", c, f).with_meta("log_normalization", instance.log_norm))
}
