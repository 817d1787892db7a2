mod common;

use common::{gaussian, rel_err, rng};
use lanczos_descent::problems::{
    full_gradient, full_value, CountingObjective, DenseQuadratic, IndefiniteQuadratic, QuarticSum,
};
use lanczos_descent::{ComponentObjective, ProblemKind, ProblemSpec};
use proptest::prelude::*;

fn small_spec(kind: ProblemKind, components: usize) -> ProblemSpec {
    let mut spec = ProblemSpec::new(kind);
    spec.components = components;
    match kind {
        ProblemKind::IndefiniteQuadratic => {
            spec.eigenvalues = vec![2.0, 1.0, -1.0, 0.5, -3.0, 4.0];
        }
        ProblemKind::RosenbrockSum | ProblemKind::QuarticSum => spec.dim = 6,
        ProblemKind::LayeredGaussianMixture => {
            spec.layers = vec![2, 3];
            spec.data_dim = 3;
            spec.samples = 24;
        }
        ProblemKind::MlpLeastSquares => {
            spec.hidden = vec![4, 3];
            spec.inputs = 3;
            spec.samples = 24;
        }
    }
    spec
}

const KINDS: [ProblemKind; 5] = [
    ProblemKind::IndefiniteQuadratic,
    ProblemKind::RosenbrockSum,
    ProblemKind::LayeredGaussianMixture,
    ProblemKind::MlpLeastSquares,
    ProblemKind::QuarticSum,
];

/// Point near the default start with seeded noise.
fn point(spec: &ProblemSpec, seed: u64, spread: f64) -> Vec<f64> {
    let mut r = rng(seed);
    spec.initial_point().iter().zip(gaussian(&mut r, spec.param_dim())).map(|(x, z)| x + spread * z).collect()
}

fn central_difference_gradient(obj: &dyn ComponentObjective, j: usize, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let fp = obj.value(j, &xp);
            xp[i] = x[i] - h;
            let fm = obj.value(j, &xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

#[test]
fn analytic_gradients_match_central_differences() {
    for kind in KINDS {
        let spec = small_spec(kind, 3);
        let obj = spec.build().unwrap();
        for seed in 0..20 {
            let x = point(&spec, seed, 0.5);
            for j in 0..obj.components() {
                let g = obj.gradient(j, &x);
                let fd = central_difference_gradient(obj.as_ref(), j, &x);
                let err = rel_err(&fd, &g);
                assert!(err <= 1e-5, "{kind} seed {seed} component {j}: relative error {err:e}");
            }
        }
    }
}

#[test]
fn exact_hvp_is_symmetric_where_supported() {
    for kind in KINDS {
        let spec = small_spec(kind, 2);
        let obj = spec.build().unwrap();
        let n = obj.dim();
        for seed in 0..10 {
            let x = point(&spec, seed, 0.5);
            let mut r = rng(100 + seed);
            let (u, v) = (gaussian(&mut r, n), gaussian(&mut r, n));
            match (obj.exact_hvp(0, &x, &v), obj.exact_hvp(0, &x, &u)) {
                (Some(hv), Some(hu)) => {
                    assert!(obj.supports_exact_hvp());
                    let a: f64 = u.iter().zip(&hv).map(|(p, q)| p * q).sum();
                    let b: f64 = v.iter().zip(&hu).map(|(p, q)| p * q).sum();
                    assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs().max(b.abs())), "{kind}: {a} vs {b}");
                }
                (None, None) => assert!(!obj.supports_exact_hvp(), "{kind}"),
                _ => panic!("{kind}: inconsistent exact HVP support"),
            }
        }
    }
}

#[test]
fn instances_are_pure_functions_of_the_spec() {
    for kind in KINDS {
        let spec = small_spec(kind, 3);
        let (a, b) = (spec.build().unwrap(), spec.clone().build().unwrap());
        let x = point(&spec, 7, 0.3);
        for j in 0..3 {
            assert_eq!(a.value(j, &x).to_bits(), b.value(j, &x).to_bits());
            assert_eq!(a.gradient(j, &x), b.gradient(j, &x));
        }
        assert_eq!(spec.initial_point(), spec.clone().initial_point());
    }
}

#[test]
fn mixture_values_are_finite_and_non_negative() {
    let spec = ProblemSpec { components: 10, ..ProblemSpec::new(ProblemKind::LayeredGaussianMixture) };
    let obj = spec.build().unwrap();
    for seed in 0..10 {
        let x = point(&spec, seed, 3.0);
        for j in 0..10 {
            let v = obj.value(j, &x);
            assert!(v.is_finite() && v >= 0.0, "component {j}: {v}");
        }
    }
}

#[test]
fn mixture_floor_keeps_far_points_finite() {
    let spec = small_spec(ProblemKind::LayeredGaussianMixture, 2);
    let obj = spec.build().unwrap();
    let x = point(&spec, 3, 1e3);
    assert!(full_value(obj.as_ref(), &x).unwrap().is_finite());
    assert!(full_gradient(obj.as_ref(), &x).unwrap().iter().all(|g| g.is_finite()));
}

#[test]
fn full_gradient_of_quadratic_is_dx() {
    let eigs = vec![3.0, -2.0, 0.5];
    let q = IndefiniteQuadratic::new(eigs.clone(), 3).unwrap();
    let x = [1.5, -0.5, 2.0];
    let g = full_gradient(&q, &x).unwrap();
    for i in 0..3 {
        assert!((g[i] - eigs[i] * x[i]).abs() <= 1e-15);
    }
}

#[test]
fn dense_quadratic_matches_definition() {
    let a = vec![2.0, 1.0, 1.0, -3.0];
    let p = DenseQuadratic::new(a, vec![1.0, -1.0], 2).unwrap();
    let x = [1.0, 2.0];
    // 0.5 * (2 + 2 + 2 - 12) + (1 - 2) = -4
    assert!((full_value(&p, &x).unwrap() + 4.0).abs() < 1e-14);
    assert!(DenseQuadratic::new(vec![1.0, 2.0, 0.0, 1.0], vec![0.0; 2], 1).is_err());
}

#[test]
fn counting_wrapper_counts() {
    let c = CountingObjective::new(QuarticSum::new(2, 1).unwrap());
    let x = [1.0, 1.0];
    c.value(0, &x);
    c.gradient(0, &x);
    c.gradient(0, &x);
    c.exact_hvp(0, &x, &x);
    assert_eq!((c.value_calls(), c.gradient_calls(), c.hvp_calls()), (1, 2, 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn full_value_is_partition_invariant(
        kind_idx in 0usize..5,
        m in 2usize..6,
        seed in 0u64..1000,
    ) {
        let kind = KINDS[kind_idx];
        let mut one = small_spec(kind, 1);
        let mut many = small_spec(kind, m);
        if kind == ProblemKind::RosenbrockSum {
            // pairs are the unit of partition
            one.dim = 2 * m;
            many.dim = 2 * m;
        }
        let (a, b) = (one.build().unwrap(), many.build().unwrap());
        let x = point(&one, seed, 0.7);
        let (fa, fb) = (full_value(a.as_ref(), &x).unwrap(), full_value(b.as_ref(), &x).unwrap());
        prop_assert!((fa - fb).abs() <= 1e-12 * fa.abs().max(1.0), "{} vs {}", fa, fb);
        let (ga, gb) = (full_gradient(a.as_ref(), &x).unwrap(), full_gradient(b.as_ref(), &x).unwrap());
        prop_assert!(rel_err(&gb, &ga) <= 1e-11);
    }

    #[test]
    fn wrong_dimension_is_rejected(kind_idx in 0usize..5, extra in 1usize..3) {
        let spec = small_spec(KINDS[kind_idx], 2);
        let obj = spec.build().unwrap();
        let x = vec![0.0; obj.dim() + extra];
        prop_assert!(full_value(obj.as_ref(), &x).is_err());
        prop_assert!(full_gradient(obj.as_ref(), &x).is_err());
    }
}
