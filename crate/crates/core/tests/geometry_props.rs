mod common;

use common::project_simplex_grid;
use proptest::prelude::*;
use volnmf::geometry::{
    constraint_violation, in_dual_cone, is_ssc1_violation_witness, project_constraint,
    project_simplex_vector, ssc_check_exact_k3, ssc_check_sampling, ConstraintPlacement, Factor, SscVerdict,
};
use volnmf::Matrix;

fn vector() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=6).prop_flat_map(|d| prop::collection::vec(-2.0f64..2.0, d))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_matches_grid_oracle(v in vector()) {
        let p = project_simplex_vector(&v);
        let g = project_simplex_grid(&v);
        prop_assert!(dist(&p, &g) < 2e-3, "{p:?} vs {g:?}");
    }

    #[test]
    fn projection_is_feasible_and_idempotent(v in vector()) {
        let p = project_simplex_vector(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(project_simplex_vector(&p), p);
    }

    #[test]
    fn projection_variational_inequality(v in vector()) {
        // ⟨v - p, q - p⟩ ≤ 0 for every vertex q of the simplex.
        let p = project_simplex_vector(&v);
        for k in 0..v.len() {
            let inner: f64 = (0..v.len())
                .map(|i| (v[i] - p[i]) * (if i == k { 1.0 } else { 0.0 } - p[i]))
                .sum();
            prop_assert!(inner <= 1e-12, "vertex {k}: {inner}");
        }
    }

    #[test]
    fn shift_invariance(v in vector(), c in -3.0f64..3.0) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let a = project_simplex_vector(&v);
        let b = project_simplex_vector(&shifted);
        prop_assert!(dist(&a, &b) < 1e-12);
    }

    #[test]
    fn constraint_projection_is_feasible(
        data in prop::collection::vec(-1.0f64..2.0, 12),
        idx in 0usize..5,
    ) {
        let a = Matrix::new(4, 3, data).unwrap();
        let placement = ConstraintPlacement::ALL[idx];
        for which in [Factor::M, Factor::H] {
            let p = project_constraint(&a, which, placement);
            prop_assert!(constraint_violation(&p, which, placement) <= 1e-12);
            prop_assert_eq!(project_constraint(&p, which, placement), p);
        }
    }
}

fn random_generators(seed: u64) -> Matrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = Matrix::from_fn(6, 3, |_, _| {
            if rng.random::<f64>() < 0.4 {
                0.0
            } else {
                rng.random::<f64>()
            }
        });
        if volnmf::linalg::logdet_shifted_gram(&m.gram(), 0.0).is_ok_and(|v| v > -20.0) {
            return m;
        }
    }
}

#[test]
fn checkers_agree_in_direction() {
    let mut violated = 0;
    for seed in 0..50 {
        let m = random_generators(seed);
        let exact = ssc_check_exact_k3(&m).unwrap();
        let sampled = ssc_check_sampling(&m, 20_000, seed).unwrap();
        if sampled.ssc1 == SscVerdict::Violated {
            assert_eq!(exact.ssc1, SscVerdict::Violated, "seed {seed}");
            assert!(is_ssc1_violation_witness(
                &m,
                sampled.certificate.as_ref().unwrap()
            ));
        }
        if exact.ssc1 == SscVerdict::Violated {
            violated += 1;
            let y = exact.certificate.as_ref().unwrap();
            assert!(is_ssc1_violation_witness(&m, y));
        }
    }
    assert!(
        violated > 0 && violated < 50,
        "instances should exercise both verdicts"
    );
}

#[test]
fn dual_cone_rays_are_members() {
    for seed in 0..20 {
        let m = random_generators(seed);
        for y in volnmf::geometry::dual_cone_extreme_rays_k3(&m).unwrap() {
            assert!(in_dual_cone(&m, &y));
        }
    }
}
