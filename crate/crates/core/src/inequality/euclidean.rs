//! Euclidean log-Sobolev inequalities with Lebesgue reference measure.
//!
//! For normalized φ (∫e^{−φ} = 1) and λ > 0,
//!
//! Ent_dx(e^g) ≤ −n log(λe) ∫e^g dx + ∫ φ*(−λ∇g) e^g dx,
//!
//! with equality for g = −φ(· − x̄), λ = 1. For a q-homogeneous C and
//! 1/p + 1/q = 1, optimizing λ gives
//!
//! Ent_dx(e^g) ≤ (n/p) M log( p K / (n e^{p−1} ℒ^{p/n} M) ),
//!
//! with M = ∫e^g, K = ∫C*(−∇g)e^g and ℒ = ∫e^{−C}.

use crate::conjugate::{conjugate_value, grad_inverse};
use crate::error::{Error, Result};
use crate::func::SmoothFn;
use crate::measure::{log_integral_exp, QuadratureSpec, DEFAULT_ACCURACY};
use crate::potential::Potential;
use crate::quadrature::{BoxRule, NeumaierSum};
use crate::regularity::{analyze_regularity, ProbeBox};
use crate::report::VerificationReport;

/// Largest |log ∫e^{−φ}| accepted as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Relative agreement required between the closed-form homogeneous bound
/// and the numerical infimum over λ.
pub const INFIMUM_RTOL: f64 = 1e-6;

/// The grid maximizer of g on [−20, 20]ⁿ, used to center the box.
fn peak_of(g: &dyn SmoothFn) -> Vec<f64> {
    let n = g.dim();
    let per_axis: usize = if n == 1 { 401 } else { 81 };
    let node = |k: usize| -20.0 + 40.0 * k as f64 / (per_axis - 1) as f64;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let total = per_axis.pow(n as u32);
    for idx in 0..total {
        let x: Vec<f64> = (0..n).map(|d| node((idx / per_axis.pow(d as u32)) % per_axis)).collect();
        let v = g.value(&x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Lebesgue box for e^g: both resolutions.
fn lebesgue_box(g: &dyn SmoothFn) -> Result<QuadratureSpec> {
    if g.dim() > 2 {
        return Err(Error::InvalidArgument("Euclidean verifiers support dimension 1 or 2".into()));
    }
    let li = log_integral_exp(&peak_of(g), |x| g.value(x), DEFAULT_ACCURACY)?;
    Ok(li.spec)
}

/// Values of g and ∇g with the total mass on one rule.
struct Nodes {
    rule: BoxRule,
    g: Vec<f64>,
    grad: Vec<Vec<f64>>,
    log_mass: f64,
}

impl Nodes {
    fn new(spec: &QuadratureSpec, g: &dyn SmoothFn) -> Result<Self> {
        let rule = spec.rule();
        let gv: Vec<f64> = rule.iter().map(|(x, _)| g.value(x)).collect();
        let grad: Vec<Vec<f64>> = rule.iter().map(|(x, _)| g.grad(x)).collect();
        if gv.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("g on the Lebesgue box".into()));
        }
        let m = gv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = NeumaierSum::default();
        for (w, v) in rule.weights().iter().zip(&gv) {
            s.add(w * (v - m).exp());
        }
        let log_mass = m + s.total().ln();
        Ok(Self { rule, g: gv, grad, log_mass })
    }

    fn mass(&self) -> f64 {
        self.log_mass.exp()
    }

    /// ∫ f e^g dx.
    fn weighted(&self, f: &[f64]) -> f64 {
        let mut s = NeumaierSum::default();
        for ((w, v), fv) in self.rule.weights().iter().zip(&self.g).zip(f) {
            s.add(w * fv * (v - self.log_mass).exp());
        }
        self.mass() * s.total()
    }

    /// Ent_dx(e^g) = ∫ e^g (g − log M) dx.
    fn entropy(&self) -> f64 {
        let u: Vec<f64> = self.g.iter().map(|v| v - self.log_mass).collect();
        self.weighted(&u)
    }

    /// ∫ φ*(−s∇g) e^g dx.
    fn conjugate_term(&self, phi: &Potential, s: f64) -> Result<f64> {
        let vals = self
            .grad
            .iter()
            .map(|d| conjugate_value(phi, &d.iter().map(|v| -s * v).collect::<Vec<_>>()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.weighted(&vals))
    }
}

fn log_normalization(phi: &Potential) -> Result<f64> {
    let center = grad_inverse(phi, &vec![0.0; phi.dim()])?;
    Ok(log_integral_exp(&center, |x| -phi.value(x), DEFAULT_ACCURACY)?.log_value)
}

fn euclidean_sides(nodes: &Nodes, phi: &Potential, lambda: f64) -> Result<(f64, f64)> {
    let n = phi.dim() as f64;
    let rhs = -n * (lambda.ln() + 1.0) * nodes.mass() + nodes.conjugate_term(phi, lambda)?;
    Ok((nodes.entropy(), rhs))
}

pub fn verify_euclidean_lsi(potential: &Potential, g: &dyn SmoothFn, lambda_scale: f64) -> Result<VerificationReport> {
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda_scale}")));
    }
    if g.dim() != potential.dim() {
        return Err(Error::DimensionMismatch { expected: potential.dim(), got: g.dim() });
    }
    let log_z = log_normalization(potential)?;
    if log_z.abs() > NORMALIZATION_TOL {
        return Err(Error::Hypothesis(format!("potential is not normalized: log ∫e^(-φ) = {log_z}")));
    }
    let spec = lebesgue_box(g)?;
    let coarse = euclidean_sides(&Nodes::new(&spec, g)?, potential, lambda_scale)?;
    let fine_nodes = Nodes::new(&spec.refined(), g)?;
    let fine = euclidean_sides(&fine_nodes, potential, lambda_scale)?;
    Ok(VerificationReport::two_resolution("euclidean", coarse, fine)
        .with_meta("lambda", lambda_scale)
        .with_meta("mass", fine_nodes.mass())
        .with_meta("box_radius", spec.radius))
}

/// Golden-section minimization of a unimodal function on [a, b].
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

struct HomogeneousSides {
    lhs: f64,
    rhs: f64,
    mass: f64,
    k: f64,
}

fn homogeneous_sides(nodes: &Nodes, c: &Potential, p: f64, log_l: f64) -> Result<HomogeneousSides> {
    let n = c.dim() as f64;
    let mass = nodes.mass();
    let k = nodes.conjugate_term(c, 1.0)?;
    if !(k > 0.0) {
        return Err(Error::Hypothesis(format!("∫C*(−∇g)e^g dx = {k} is not positive")));
    }
    let log_arg = (p * k).ln() - n.ln() - (p - 1.0) - (p / n) * log_l - mass.ln();
    Ok(HomogeneousSides {
        lhs: nodes.entropy(),
        rhs: (n / p) * mass * log_arg,
        mass,
        k,
    })
}

/// `c_potential` is used without its shift; `q` is its homogeneity degree.
pub fn verify_homogeneous_elsi(c_potential: &Potential, q: f64, g: &dyn SmoothFn) -> Result<VerificationReport> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("homogeneity degree must exceed 1, got {q}")));
    }
    let c = c_potential.clone().with_shift(0.0);
    if g.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: g.dim() });
    }
    let reg = analyze_regularity(&c, &ProbeBox::symmetric(c.dim(), 10.0), if c.dim() == 1 { 201 } else { 441 })?;
    match reg.homogeneity_q {
        Some(d) if (d - q).abs() <= 1e-6 * q => {}
        other => {
            return Err(Error::Hypothesis(format!(
                "potential is not {q}-homogeneous (detected {other:?})"
            )))
        }
    }
    let p = q / (q - 1.0);
    let n = c.dim() as f64;
    let log_l = log_normalization(&c)?;
    let spec = lebesgue_box(g)?;
    let coarse = homogeneous_sides(&Nodes::new(&spec, g)?, &c, p, log_l)?;
    let fine_nodes = Nodes::new(&spec.refined(), g)?;
    let fine = homogeneous_sides(&fine_nodes, &c, p, log_l)?;

    // infimum over λ of the Euclidean bound with φ = C + log ℒ
    let phi = c.clone().with_shift(log_l);
    let (log_lambda, inf_rhs) = golden_min(
        |t| Ok(euclidean_sides(&fine_nodes, &phi, t.exp())?.1),
        -10.0,
        10.0,
    )?;
    let agrees = (inf_rhs - fine.rhs).abs() <= INFIMUM_RTOL * fine.rhs.abs().max(1.0);
    let lambda_closed = (n * fine.mass / (p * fine.k)).powf(1.0 / p);
    Ok(
        VerificationReport::two_resolution("homogeneous", (coarse.lhs, coarse.rhs), (fine.lhs, fine.rhs))
            .with_meta("q", q)
            .with_meta("p", p)
            .with_meta("log_L", log_l)
            .with_meta("lambda_opt", lambda_closed)
            .with_meta("lambda_search", log_lambda.exp())
            .with_meta("lambda_infimum_rhs", inf_rhs)
            .with_meta("lambda_infimum_agrees", agrees),
    )
}
