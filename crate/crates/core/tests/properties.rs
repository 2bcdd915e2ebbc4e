//! Property tests for the invariants of potentials, conjugation, measures,
//! brackets and configs.

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use convexlab::conjugate::{conjugate_at, conjugate_value, grad_inverse, mlsi_bracket};
use convexlab::func::{Bump, SmoothFn};
use convexlab::grid::{llt_1d, GridFunction1D, GridSpec};
use convexlab::inequality::gaussian_bracket_identity;
use convexlab::measure::{build_measure, Measure, DEFAULT_ACCURACY};
use convexlab::potential::{Potential, PotentialSpec};
use convexlab::regularity::{analyze_regularity, ProbeBox};
use convexlab::report::{classify, Status};
use convexlab::suite::{ExperimentConfig, Family, TestFunctionSpec, VerifierKind};
use convexlab::supconv::sup_convolution;

fn potentials() -> Vec<(&'static str, Potential)> {
    vec![
        ("gaussian", Potential::gaussian(1)),
        ("gaussian2", Potential::gaussian(2)),
        ("power4", Potential::power(1, 4.0).unwrap()),
        ("power3_2d", Potential::power(2, 3.0).unwrap()),
        ("quartic", Potential::quartic()),
        ("perturbed", Potential::perturbed_sine(Potential::gaussian(1), 0.1)),
    ]
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

fn fd_grad(p: &Potential, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * (1.0 + x[i].abs());
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[i] += h;
            b[i] -= h;
            (p.value(&a) - p.value(&b)) / (2.0 * h)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn measures() -> &'static [(&'static str, Measure)] {
    static M: OnceLock<Vec<(&'static str, Measure)>> = OnceLock::new();
    M.get_or_init(|| {
        vec![
            ("gaussian", build_measure(&Potential::gaussian(1), DEFAULT_ACCURACY).unwrap()),
            ("quartic", build_measure(&Potential::quartic(), DEFAULT_ACCURACY).unwrap()),
            ("power4", build_measure(&Potential::power(1, 4.0).unwrap(), DEFAULT_ACCURACY).unwrap()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn oracles_match_finite_differences(idx in 0usize..6, raw in point(2)) {
        let (_, p) = &potentials()[idx];
        let x = &raw[..p.dim()];
        let g = p.grad(x);
        let fd = fd_grad(p, x);
        for (a, b) in g.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "grad {a} vs fd {b}");
        }
        let h = p.hess(x);
        for j in 0..p.dim() {
            let step = 1e-5 * (1.0 + x[j].abs());
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[j] += step;
            b[j] -= step;
            let (ga, gb) = (p.grad(&a), p.grad(&b));
            for i in 0..p.dim() {
                let fd = (ga[i] - gb[i]) / (2.0 * step);
                prop_assert!((h[(i, j)] - fd).abs() <= 1e-4 * (1.0 + h[(i, j)].abs()), "hess {} vs {fd}", h[(i, j)]);
            }
        }
    }

    #[test]
    fn even_potentials_are_symmetric(idx in 0usize..5, raw in point(2)) {
        let (_, p) = &potentials()[idx];
        let x = &raw[..p.dim()];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let v = p.value(x);
        prop_assert!((v - p.value(&neg)).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn young_inequality(idx in 0usize..6, x in point(2), y in point(2)) {
        let (_, p) = &potentials()[idx];
        let (x, y) = (&x[..p.dim()], &y[..p.dim()]);
        let star = conjugate_value(p, y).unwrap();
        prop_assert!(dot(x, y) <= p.value(x) + star + 1e-9);
    }

    #[test]
    fn young_equality_on_the_gradient(idx in 0usize..6, x in point(2)) {
        let (_, p) = &potentials()[idx];
        let x = &x[..p.dim()];
        let y = p.grad(x);
        let r = conjugate_at(p, &y).unwrap();
        let closed = dot(x, &y) - p.value(x);
        prop_assert!((p.value(x) + r.value - dot(x, &y)).abs() <= 1e-8 * (1.0 + closed.abs()));
        prop_assert!((r.value - closed).abs() <= 1e-9 * (1.0 + p.value(x).abs()));
    }

    #[test]
    fn gradient_inverse_round_trip(idx in 0usize..6, x in point(2)) {
        let (_, p) = &potentials()[idx];
        let x = &x[..p.dim()];
        let back = grad_inverse(p, &p.grad(x)).unwrap();
        let err: Vec<f64> = back.iter().zip(x).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&err) <= 1e-8 * (1.0 + norm(x)), "{back:?} vs {x:?}");
    }

    #[test]
    fn gaussian_bracket_is_half_square(x in point(3), v in point(3)) {
        let b = gaussian_bracket_identity(&x, &v);
        let want = 0.5 * dot(&v, &v);
        prop_assert!((b - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn bracket_is_nonnegative(idx in 0usize..6, x in point(2), v in point(2)) {
        let (_, p) = &potentials()[idx];
        let b = mlsi_bracket(p, &x[..p.dim()], &v[..p.dim()]).unwrap();
        prop_assert!(b >= -1e-9, "{b}");
    }

    #[test]
    fn sup_convolution_dominates(a in -0.5..0.5f64, c in -2.0..2.0f64, w in 0.3..2.0f64,
                                 z in -2.0..2.0f64, s in 0.01..0.4f64) {
        let g = Bump::scalar(a, c, w);
        let sc = sup_convolution(&g, &Potential::quartic(), s, &[z]).unwrap();
        prop_assert!(sc.value.is_finite());
        prop_assert!(sc.value >= g.value(&[z]) - 1e-12);
    }

    #[test]
    fn biconjugate_of_convex_samples(coeffs in prop::collection::vec(0.0..1.0f64, 3), slope in -1.0..1.0f64) {
        // f = slope·x + c0·x² + c1·x⁴ + c2·|x|³ is convex
        let f = |x: f64| slope * x + coeffs[0] * x * x + coeffs[1] * x.powi(4) + coeffs[2] * x.abs().powi(3);
        let spec = GridSpec::new(-2.0, 2.0, 201).unwrap();
        let g = GridFunction1D::from_fn(spec, f).unwrap();
        let max_slope = (0..200).map(|i| ((g.values()[i + 1] - g.values()[i]) / spec.step()).abs()).fold(0.0, f64::max);
        let dual = GridSpec::new(-max_slope - 1.0, max_slope + 1.0, 801).unwrap();
        let star = llt_1d(&g, dual).unwrap();
        let back = llt_1d(&star, spec).unwrap();
        let h = spec.step().max(dual.step());
        let bound = 2.0 * h * max_slope + h * h;
        for i in 1..200 {
            prop_assert!((back.values()[i] - g.values()[i]).abs() <= bound, "node {i}");
        }
    }

    #[test]
    fn entropy_is_nonnegative_and_variational(idx in 0usize..3, a in -1.0..1.0f64, c in -2.0..2.0f64, w in 0.3..2.0f64) {
        let (_, m) = &measures()[idx];
        let g = Bump::scalar(a, c, w);
        let ent = m.entropy(|x| g.value(x)).unwrap();
        prop_assert!(ent >= -1e-12);
        // inf over b > 0 of ∫(e^g log(e^g/b) − e^g + b)dμ is attained at b = ∫e^g dμ
        let mass = m.integrate(|x| g.value(x).exp()).unwrap();
        let at = |b: f64| m.integrate(|x| { let e = g.value(x).exp(); e * (g.value(x) - b.ln()) - e + b }).unwrap();
        let grid_min = (-50..=50).map(|k| at(mass * (1.0 + 0.002 * k as f64))).fold(f64::INFINITY, f64::min);
        prop_assert!((grid_min - ent).abs() <= 1e-8 * (1.0 + ent), "{grid_min} vs {ent}");
    }

    #[test]
    fn status_classification(lhs in -10.0..10.0f64, rhs in -10.0..10.0f64, tol in 0.0..1e-3f64) {
        let s = classify(rhs - lhs, rhs, tol);
        prop_assert_eq!(s == Status::Violated, rhs - lhs < -tol);
    }

    #[test]
    fn config_round_trip(count in 0usize..50, seed in any::<u64>(), acc_exp in -12i32..=-4,
                         picks in prop::collection::btree_set(0usize..11, 1..11), poly in any::<bool>()) {
        let cfg = ExperimentConfig {
            schema: 1,
            potential: PotentialSpec::from_arg(if poly { "quartic" } else { "power:4/2" }).unwrap(),
            test_functions: TestFunctionSpec {
                family: if poly { Family::PolyBump } else { Family::Bump },
                count,
                seed,
                ..Default::default()
            },
            verifiers: picks.into_iter().map(|i| VerifierKind::ALL[i]).collect(),
            accuracy: 10f64.powi(acc_exp),
            output_dir: None,
            concentration: None,
        };
        let back = ExperimentConfig::parse(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn young_on_a_thousand_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (_, p) in potentials() {
        for _ in 0..1000 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-4.0..4.0)).collect();
            let y: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-4.0..4.0)).collect();
            assert!(dot(&x, &y) <= p.value(&x) + conjugate_value(&p, &y).unwrap() + 1e-9);
        }
    }
}

#[test]
fn smallest_eigenvalue_respects_lambda() {
    for (name, p) in potentials() {
        let reg = analyze_regularity(&p, &ProbeBox::symmetric(p.dim(), 5.0), 121).unwrap();
        for i in 0..=40 {
            let t = -5.0 + i as f64 * 0.25;
            let x = vec![t; p.dim()];
            let eig = p.hess(&x).symmetric_eigenvalues().min();
            assert!(eig >= reg.lambda - 1e-9, "{name} at {t}: {eig} < {}", reg.lambda);
        }
        if let Some(osc) = reg.oscillation {
            assert!((0.0..=0.2 + 1e-12).contains(&osc), "{name} osc {osc}");
        }
    }
}
