mod common;

use common::{gaussian, rel_err, rng};
use lanczos_descent::hvp::{default_eps0, exact_hvp, fd_hvp, FdSettings};
use lanczos_descent::problems::{CountingObjective, IndefiniteQuadratic, QuarticSum};
use lanczos_descent::{ComponentObjective, Error, HessianScope, HvpMode, HvpOperator, LinearOperator, ProblemKind, ProblemSpec};
use proptest::prelude::*;

fn mixture() -> ProblemSpec {
    ProblemSpec {
        components: 4,
        layers: vec![3, 3],
        data_dim: 4,
        samples: 40,
        ..ProblemSpec::new(ProblemKind::LayeredGaussianMixture)
    }
}

#[test]
fn fd_matches_exact_on_quartic_and_mixture() {
    let quartic = QuarticSum::new(8, 2).unwrap();
    let spec = mixture();
    let mix = spec.build().unwrap();
    let objs: [(&dyn ComponentObjective, Vec<f64>); 2] =
        [(&quartic, vec![0.5; 8]), (mix.as_ref(), spec.initial_point())];
    for (obj, base) in objs {
        for seed in 0..20 {
            let mut r = rng(seed);
            let x: Vec<f64> = base.iter().zip(gaussian(&mut r, base.len())).map(|(b, z)| b + 0.5 * z).collect();
            let v = gaussian(&mut r, base.len());
            let j = seed as usize % obj.components();
            let exact = exact_hvp(obj, j, &x).unwrap().apply(&v).unwrap();
            let fd = fd_hvp(obj, j, &x, default_eps0()).unwrap().apply(&v).unwrap();
            let err = rel_err(&fd, &exact);
            assert!(err <= 1e-4, "seed {seed}: relative error {err:e}");
        }
    }
}

#[test]
fn one_gradient_per_apply() {
    let obj = CountingObjective::new(QuarticSum::new(4, 1).unwrap());
    let x = [1.0, -0.5, 0.25, 2.0];
    let op = fd_hvp(&obj, 0, &x, default_eps0()).unwrap();
    let base = obj.gradient_calls();
    assert_eq!(base, 1, "base gradient cached at construction");
    for k in 1..=5 {
        op.apply(&[1.0, 0.0, 0.0, k as f64]).unwrap();
        assert_eq!(obj.gradient_calls(), base + k);
    }
}

#[test]
fn fd_zero_direction_is_an_error_and_exact_is_linear() {
    let q = IndefiniteQuadratic::new(vec![2.0, -1.0], 1).unwrap();
    let fd = fd_hvp(&q, 0, &[3.0, 4.0], default_eps0()).unwrap();
    assert!(matches!(fd.apply(&[0.0, 0.0]), Err(Error::ZeroDirection)));
    let ex = exact_hvp(&q, 0, &[3.0, 4.0]).unwrap();
    assert_eq!(ex.apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    assert_eq!(ex.apply(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
}

#[test]
fn auto_mode_falls_back_for_mlp() {
    let spec = ProblemSpec { components: 2, samples: 10, ..ProblemSpec::new(ProblemKind::MlpLeastSquares) };
    let obj = spec.build().unwrap();
    let x = spec.initial_point();
    let auto = HvpOperator::with_mode(obj.as_ref(), HessianScope::Component(0), &x, HvpMode::Auto, FdSettings::default()).unwrap();
    assert!(!auto.is_exact());
    assert!(matches!(exact_hvp(obj.as_ref(), 0, &x), Err(Error::UnsupportedHvp)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fd_is_scale_robust(seed in 0u64..10_000, c_idx in 0usize..3) {
        let c = [1e-3, 1.0, 1e3][c_idx];
        let obj = QuarticSum::new(5, 1).unwrap();
        let mut r = rng(seed);
        let x = gaussian(&mut r, 5);
        let v = gaussian(&mut r, 5);
        let op = fd_hvp(&obj, 0, &x, default_eps0()).unwrap();
        let hv = op.apply(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|t| c * t).collect();
        let hcv = op.apply(&scaled).unwrap();
        let expected: Vec<f64> = hv.iter().map(|t| c * t).collect();
        prop_assert!(rel_err(&hcv, &expected) <= 1e-3);
    }

    #[test]
    fn exact_quadratic_products_are_linear(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let eigs = gaussian(&mut r, 6);
        let q = IndefiniteQuadratic::new(eigs, 2).unwrap();
        let x = gaussian(&mut r, 6);
        let (u, v) = (gaussian(&mut r, 6), gaussian(&mut r, 6));
        let op = exact_hvp(&q, 1, &x).unwrap();
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let lhs = op.apply(&sum).unwrap();
        let rhs: Vec<f64> = op.apply(&u).unwrap().iter().zip(op.apply(&v).unwrap()).map(|(a, b)| a + b).collect();
        prop_assert!(rel_err(&lhs, &rhs) <= 1e-12 || rhs.iter().all(|t| t.abs() < 1e-300));
        prop_assert_eq!(op.dim(), 6);
    }

    #[test]
    fn fd_on_quadratics_is_exact_up_to_roundoff(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let eigs = gaussian(&mut r, 4);
        let q = IndefiniteQuadratic::new(eigs.clone(), 1).unwrap();
        let x = gaussian(&mut r, 4);
        let v = gaussian(&mut r, 4);
        let fd = fd_hvp(&q, 0, &x, default_eps0()).unwrap().apply(&v).unwrap();
        let exact: Vec<f64> = eigs.iter().zip(&v).map(|(e, t)| e * t).collect();
        prop_assert!(rel_err(&fd, &exact) <= 1e-6);
    }
}
