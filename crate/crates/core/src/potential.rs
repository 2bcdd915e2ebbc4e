//! Potentials φ of log-concave measures e^{−φ}dx.
//!
//! A [`Potential`] is immutable and carries an additive `shift`; building a
//! measure folds log Z into that shift so that ∫e^{−φ} = 1. The built-in
//! families are
//!
//! | kind | φ(x) − shift |
//! |------|--------------|
//! | gaussian | ‖x‖²/2 |
//! | power(p) | ‖x‖^p/p |
//! | polynomial(c) | Σᵢ Σₖ cₖ xᵢᵏ (separable) |
//! | perturbed(base, U) | base(x) + U(x) |
//! | custom | user supplied [`SmoothFn`] |

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Sine, SmoothFn};

#[derive(Clone)]
pub enum PotentialKind {
    Gaussian,
    Power {
        p: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Perturbed {
        base: Box<Potential>,
        perturbation: Arc<dyn SmoothFn>,
        /// Amplitude of the sine perturbation when built from a spec.
        amplitude: Option<f64>,
    },
    Custom(Arc<dyn SmoothFn>),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Gaussian => write!(f, "Gaussian"),
            PotentialKind::Power { p } => write!(f, "Power(p={p})"),
            PotentialKind::Polynomial { coeffs } => write!(f, "Polynomial({coeffs:?})"),
            PotentialKind::Perturbed { base, .. } => write!(f, "Perturbed({:?} + U)", base.kind),
            PotentialKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Potential {
    dim: usize,
    kind: PotentialKind,
    shift: f64,
}

/// Which derivative [`Potential::evaluate`] should return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    Grad,
    Hess,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Value(f64),
    Grad(Vec<f64>),
    Hess(DMatrix<f64>),
}

impl Evaluation {
    pub fn as_value(&self) -> Option<f64> {
        match self {
            Evaluation::Value(v) => Some(*v),
            _ => None,
        }
    }
    pub fn as_grad(&self) -> Option<&[f64]> {
        match self {
            Evaluation::Grad(v) => Some(v),
            _ => None,
        }
    }
    pub fn as_hess(&self) -> Option<&DMatrix<f64>> {
        match self {
            Evaluation::Hess(v) => Some(v),
            _ => None,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Σ b[k]·t^k with TwoSum/TwoProduct error terms, accurate to about twice
/// the working precision.
fn compensated_horner(b: &[f64], t: f64) -> f64 {
    let Some((&last, rest)) = b.split_last() else {
        return 0.0;
    };
    let (mut acc, mut err) = (last, 0.0);
    for &c in rest.iter().rev() {
        let p = acc * t;
        let pe = acc.mul_add(t, -p);
        let sum = p + c;
        let bb = sum - p;
        let se = (p - (sum - bb)) + (c - bb);
        acc = sum;
        err = err * t + (pe + se);
    }
    acc + err
}

fn poly_eval(coeffs: &[f64], t: f64) -> (f64, f64, f64) {
    // Horner for value, first and second derivative together
    let mut v = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &c in coeffs.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + v;
        v = v * t + c;
    }
    (v, d1, d2)
}

impl Potential {
    pub fn gaussian(dim: usize) -> Self {
        Self {
            dim,
            kind: PotentialKind::Gaussian,
            shift: 0.0,
        }
    }

    /// ‖x‖^p/p. Any p > 0 is accepted here; regularity analysis rejects the
    /// ones that are not C² and strictly convex.
    pub fn power(dim: usize, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidArgument(format!("power exponent must be > 0, got {p}")));
        }
        Ok(Self {
            dim,
            kind: PotentialKind::Power { p },
            shift: 0.0,
        })
    }

    /// Separable polynomial Σᵢ P(xᵢ) with P(t) = Σₖ coeffs[k]·tᵏ.
    pub fn polynomial(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("polynomial needs finite coefficients".into()));
        }
        Ok(Self {
            dim,
            kind: PotentialKind::Polynomial { coeffs },
            shift: 0.0,
        })
    }

    /// x⁴/12 + x²/2, the running example of a potential more convex than the Gaussian.
    pub fn quartic() -> Self {
        Self::polynomial(1, vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0]).expect("valid coefficients")
    }

    /// base + U.
    pub fn perturbed(base: Potential, perturbation: Arc<dyn SmoothFn>) -> Result<Self> {
        if perturbation.dim() != base.dim {
            return Err(Error::DimensionMismatch {
                expected: base.dim,
                got: perturbation.dim(),
            });
        }
        Ok(Self {
            dim: base.dim,
            kind: PotentialKind::Perturbed {
                base: Box::new(base),
                perturbation,
                amplitude: None,
            },
            shift: 0.0,
        })
    }

    /// base + a·Σ sin(xᵢ).
    pub fn perturbed_sine(base: Potential, amplitude: f64) -> Self {
        let dim = base.dim;
        Self {
            dim,
            kind: PotentialKind::Perturbed {
                base: Box::new(base),
                perturbation: Arc::new(Sine::new(dim, amplitude, 1.0)),
                amplitude: Some(amplitude),
            },
            shift: 0.0,
        }
    }

    pub fn custom(field: Arc<dyn SmoothFn>) -> Self {
        Self {
            dim: field.dim(),
            kind: PotentialKind::Custom(field),
            shift: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// Copy with the shift chosen so that φ(0) = 0.
    pub fn centered(&self) -> Self {
        let origin = vec![0.0; self.dim];
        let raw0 = self.raw_value(&origin);
        self.clone().with_shift(-raw0)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, PotentialKind::Gaussian)
    }

    /// The exponent p for the power family (2 for the Gaussian).
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Gaussian => Some(2.0),
            PotentialKind::Power { p } => Some(p),
            _ => None,
        }
    }

    /// The perturbation U of a perturbed potential.
    pub fn perturbation(&self) -> Option<(&Potential, &Arc<dyn SmoothFn>)> {
        match &self.kind {
            PotentialKind::Perturbed {
                base, perturbation, ..
            } => Some((base, perturbation)),
            _ => None,
        }
    }

    /// φ(x) without the additive shift.
    pub fn raw_value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Gaussian => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            PotentialKind::Power { p } => norm(x).powf(*p) / p,
            PotentialKind::Polynomial { coeffs } => x.iter().map(|&t| poly_eval(coeffs, t).0).sum(),
            PotentialKind::Perturbed {
                base, perturbation, ..
            } => base.value(x) + perturbation.value(x),
            PotentialKind::Custom(f) => f.value(x),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.raw_value(x) + self.shift
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Gaussian => x.to_vec(),
            PotentialKind::Power { p } => {
                let r = norm(x);
                if r == 0.0 {
                    return vec![0.0; x.len()];
                }
                let s = r.powf(p - 2.0);
                x.iter().map(|v| v * s).collect()
            }
            PotentialKind::Polynomial { coeffs } => {
                x.iter().map(|&t| poly_eval(coeffs, t).1).collect()
            }
            PotentialKind::Perturbed {
                base, perturbation, ..
            } => base
                .grad(x)
                .into_iter()
                .zip(perturbation.grad(x))
                .map(|(a, b)| a + b)
                .collect(),
            PotentialKind::Custom(f) => f.grad(x),
        }
    }

    pub fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        match &self.kind {
            PotentialKind::Gaussian => DMatrix::identity(n, n),
            PotentialKind::Power { p } => {
                let r = norm(x);
                if r == 0.0 {
                    // C² at the origin only for p ≥ 2
                    let diag = if *p == 2.0 {
                        1.0
                    } else if *p > 2.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    return DMatrix::identity(n, n) * diag;
                }
                let s = r.powf(p - 2.0);
                let k = (p - 2.0) / (r * r);
                DMatrix::from_fn(n, n, |i, j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    s * (delta + k * x[i] * x[j])
                })
            }
            PotentialKind::Polynomial { coeffs } => DMatrix::from_diagonal(
                &nalgebra::DVector::from_iterator(n, x.iter().map(|&t| poly_eval(coeffs, t).2)),
            ),
            PotentialKind::Perturbed {
                base, perturbation, ..
            } => base.hess(x) + perturbation.hess(x),
            PotentialKind::Custom(f) => f.hess(x),
        }
    }

    /// Checked evaluation of φ, ∇φ or Hess φ.
    /// x·∇φ(x) − a(φ(x) − φ(origin)). Polynomials use the coefficient form
    /// Σ (k − a)cₖxᵏ, which avoids cancelling two large terms near a root.
    pub fn growth_residual(&self, x: &[f64], origin: &[f64], a: f64) -> f64 {
        match &self.kind {
            PotentialKind::Polynomial { coeffs } if origin.iter().all(|&o| o == 0.0) => {
                let b: Vec<f64> = coeffs.iter().enumerate().map(|(k, c)| (k as f64 - a) * c).collect();
                x.iter().map(|&t| compensated_horner(&b[1..], t) * t).sum()
            }
            _ => {
                let g = self.grad(x);
                x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() - a * (self.value(x) - self.value(origin))
            }
        }
    }

    pub fn evaluate(&self, x: &[f64], order: Order) -> Result<Evaluation> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("evaluation point {x:?}")));
        }
        Ok(match order {
            Order::Value => Evaluation::Value(self.value(x)),
            Order::Grad => Evaluation::Grad(self.grad(x)),
            Order::Hess => Evaluation::Hess(self.hess(x)),
        })
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        let dim = spec.dimension.unwrap_or(1);
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        match spec.kind {
            SpecKind::Gaussian => Ok(Self::gaussian(dim)),
            SpecKind::Power => {
                let p = spec
                    .p
                    .ok_or_else(|| Error::Config("power potential needs field `p`".into()))?;
                Self::power(dim, p)
            }
            SpecKind::Polynomial => {
                let coeffs = spec.coeffs.clone().ok_or_else(|| {
                    Error::Config("polynomial potential needs field `coeffs`".into())
                })?;
                Self::polynomial(dim, coeffs)
            }
            SpecKind::Perturbed => {
                let base = spec.base.as_ref().ok_or_else(|| {
                    Error::Config("perturbed potential needs field `base`".into())
                })?;
                let mut base = Self::from_spec(base)?;
                if spec.dimension.is_some() && base.dim != dim {
                    return Err(Error::Config(format!(
                        "perturbed dimension {dim} differs from base dimension {}",
                        base.dim
                    )));
                }
                base.shift = 0.0;
                let amp = spec.perturbation_amplitude.unwrap_or(0.1);
                Ok(Self::perturbed_sine(base, amp))
            }
        }
    }

    /// The `PotentialSpec` this potential was built from; `None` for custom fields and
    /// non-sine perturbations.
    pub fn to_spec(&self) -> Option<PotentialSpec> {
        let mut spec = PotentialSpec {
            kind: SpecKind::Gaussian,
            p: None,
            coeffs: None,
            base: None,
            perturbation_amplitude: None,
            dimension: if self.dim == 1 { None } else { Some(self.dim) },
        };
        match &self.kind {
            PotentialKind::Gaussian => {}
            PotentialKind::Power { p } => {
                spec.kind = SpecKind::Power;
                spec.p = Some(*p);
            }
            PotentialKind::Polynomial { coeffs } => {
                spec.kind = SpecKind::Polynomial;
                spec.coeffs = Some(coeffs.clone());
            }
            PotentialKind::Perturbed {
                base, amplitude, ..
            } => {
                spec.kind = SpecKind::Perturbed;
                spec.base = Some(Box::new(base.to_spec()?));
                spec.perturbation_amplitude = Some((*amplitude)?);
            }
            PotentialKind::Custom(_) => return None,
        }
        Some(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Gaussian,
    Power,
    Polynomial,
    Perturbed,
}

/// Config-file description of a potential:
/// `{"kind": "gaussian"|"power"|"polynomial"|"perturbed", "p", "coeffs", "base", "perturbation_amplitude"}`
/// plus an optional `"dimension"` (default 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<PotentialSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

impl PotentialSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!("potential spec: field `{path}`: {inner}"))
        })
    }

    /// Command-line form: inline JSON, or `gaussian`, `quartic`, `power:P`,
    /// `poly:c0,c1,...`, each optionally followed by `/DIM`.
    pub fn from_arg(arg: &str) -> Result<Self> {
        let arg = arg.trim();
        if arg.starts_with('{') {
            return Self::parse(arg);
        }
        let (body, dim) = match arg.rsplit_once('/') {
            Some((b, d)) => {
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::Config(format!("potential `{arg}`: bad dimension {d:?}")))?;
                (b, Some(d))
            }
            None => (arg, None),
        };
        let (name, param) = match body.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (body, None),
        };
        let bad = |what: &str| Error::Config(format!("potential `{arg}`: {what}"));
        let mut spec = PotentialSpec {
            kind: SpecKind::Gaussian,
            p: None,
            coeffs: None,
            base: None,
            perturbation_amplitude: None,
            dimension: dim,
        };
        match (name, param) {
            ("gaussian", None) => {}
            ("quartic", None) => {
                spec.kind = SpecKind::Polynomial;
                spec.coeffs = Some(vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0]);
            }
            ("power", Some(p)) => {
                spec.kind = SpecKind::Power;
                spec.p = Some(p.parse().map_err(|_| bad("exponent is not a number"))?);
            }
            ("poly", Some(c)) => {
                spec.kind = SpecKind::Polynomial;
                let coeffs: std::result::Result<Vec<f64>, _> = c.split(',').map(|v| v.trim().parse()).collect();
                spec.coeffs = Some(coeffs.map_err(|_| bad("coefficients are not numbers"))?);
            }
            _ => return Err(bad("expected JSON, gaussian, quartic, power:P or poly:C0,C1,...")),
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_specs() {
        let q = Potential::from_spec(&PotentialSpec::from_arg("quartic").unwrap()).unwrap();
        assert_eq!(q.value(&[1.0]), Potential::quartic().value(&[1.0]));
        let p = PotentialSpec::from_arg("power:4/2").unwrap();
        assert_eq!((p.kind, p.p, p.dimension), (SpecKind::Power, Some(4.0), Some(2)));
        let j = PotentialSpec::from_arg(r#"{"kind": "gaussian"}"#).unwrap();
        assert_eq!(j.kind, SpecKind::Gaussian);
        assert!(PotentialSpec::from_arg("cubic").is_err());
        assert!(PotentialSpec::from_arg("power:x").is_err());
    }

    #[test]
    fn evaluate_examples() {
        let g = Potential::gaussian(1).with_shift(0.25);
        assert_eq!(g.evaluate(&[2.0], Order::Value).unwrap().as_value(), Some(2.25));

        let p4 = Potential::power(1, 4.0).unwrap();
        assert_eq!(p4.evaluate(&[2.0], Order::Grad).unwrap().as_grad(), Some(&[8.0][..]));

        let q = Potential::quartic();
        let h = q.evaluate(&[0.0], Order::Hess).unwrap();
        assert_eq!(h.as_hess().unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn evaluate_rejects_bad_input() {
        let g = Potential::gaussian(2);
        assert!(matches!(
            g.evaluate(&[1.0], Order::Value),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(
            g.evaluate(&[1.0, f64::NAN], Order::Grad),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn power_hessian_is_rank_one_update() {
        let p = Potential::power(2, 3.0).unwrap();
        let x = [0.6, -0.8];
        let h = p.hess(&x);
        // eigenvalues of ‖x‖^{p−2}(I + (p−2)x̂x̂ᵀ): r^{p−2} and (p−1)r^{p−2}
        let eig = h.symmetric_eigenvalues();
        let mut e: Vec<f64> = eig.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spec_round_trip() {
        let text = r#"{"kind": "perturbed", "base": {"kind": "power", "p": 4.0}, "perturbation_amplitude": 0.2}"#;
        let spec = PotentialSpec::parse(text).unwrap();
        let pot = Potential::from_spec(&spec).unwrap();
        assert_eq!(pot.to_spec().unwrap(), spec);
        assert!((pot.value(&[1.0]) - (0.25 + 0.2 * 1f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn spec_errors_name_the_field() {
        let err = PotentialSpec::parse(r#"{"kind": "cubic"}"#).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
        let err = Potential::from_spec(&PotentialSpec::parse(r#"{"kind": "power"}"#).unwrap())
            .unwrap_err();
        assert!(err.to_string().contains("`p`"));
    }
}
