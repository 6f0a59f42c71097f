mod common;

use common::{det_cofactor, inverse_gauss_jordan, nnls_coordinate_descent, row_simplex_grid_min, to_rows};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volnmf::geometry::{ConstraintPlacement, Factor};
use volnmf::linalg::frobenius_norm_sq;
use volnmf::solver::{
    build_m_majorizer, compute_lambda, init_factors, is_non_increasing, m_quadratic_value, objective_value,
    solve, solve_best_of, solve_mav, solve_volreg, update_h_pfgm, update_m_pfgm, Method, SolverConfig,
    VolumeSign,
};
use volnmf::Matrix;

fn uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(0.0f64..1.0, rows * cols).prop_map(move |v| Matrix::new(rows, cols, v).unwrap())
}

fn fit(x: &Matrix, m: &Matrix, h: &Matrix) -> f64 {
    frobenius_norm_sq(&x.sub(&m.matmul(h).unwrap()).unwrap())
}

fn shifted_gram_rows(m: &Matrix, delta: f64) -> Vec<Vec<f64>> {
    let mut g = to_rows(&m.gram());
    for (i, r) in g.iter_mut().enumerate() {
        r[i] += delta;
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn h_gradient_matches_finite_differences(x in matrix(4, 5), m in matrix(4, 3), h in matrix(3, 5)) {
        let grad = m.t_matmul(&m.matmul(&h).unwrap().sub(&x).unwrap()).unwrap().scale(2.0);
        let eps = 1e-6;
        for k in 0..3 {
            for j in 0..5 {
                let bump = |d: f64| {
                    let hp = Matrix::from_fn(3, 5, |a, b| h[(a, b)] + if (a, b) == (k, j) { d } else { 0.0 });
                    fit(&x, &m, &hp)
                };
                let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
                let g = grad[(k, j)];
                prop_assert!((fd - g).abs() <= 1e-5 * g.abs().max(1.0), "{fd} vs {g}");
            }
        }
    }

    #[test]
    fn majorizer_dominates_and_touches(
        x in matrix(5, 6),
        h in matrix(3, 6),
        m0 in matrix(5, 3),
        noise in prop::collection::vec(-0.3f64..0.3, 15),
        lambda in 0.01f64..2.0,
    ) {
        let delta = 0.1;
        let (a, c) = build_m_majorizer(&x, &h, &m0, lambda, delta).unwrap();
        let q0 = shifted_gram_rows(&m0, delta);
        let q0_inv = inverse_gauss_jordan(&q0);
        let g0 = to_rows(&m0.gram());
        let trace: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| q0_inv[i][j] * g0[j][i]).sum();
        let constant = frobenius_norm_sq(&x) + lambda * (det_cofactor(&q0).ln() - trace);
        let surrogate = |m: &Matrix| constant + 2.0 * m_quadratic_value(&a, &c, m);
        let truth = |m: &Matrix| fit(&x, m, &h) + lambda * det_cofactor(&shifted_gram_rows(m, delta)).ln();

        let at0 = (surrogate(&m0), truth(&m0));
        prop_assert!((at0.0 - at0.1).abs() <= 1e-8 * at0.1.abs().max(1.0), "{at0:?}");
        let m = Matrix::from_fn(5, 3, |i, k| (m0[(i, k)] + noise[i * 3 + k]).max(0.0));
        let (s, t) = (surrogate(&m), truth(&m));
        prop_assert!(s >= t - 1e-9 * t.abs().max(1.0), "{s} < {t}");
    }

    #[test]
    fn majorizer_matches_gauss_jordan_recomposition(
        x in matrix(4, 5), h in matrix(3, 5), m0 in matrix(4, 3), lambda in 0.0f64..3.0,
    ) {
        let (a, c) = build_m_majorizer(&x, &h, &m0, lambda, 0.1).unwrap();
        let inv = inverse_gauss_jordan(&shifted_gram_rows(&m0, 0.1));
        for p in 0..3 {
            for q in 0..3 {
                let hh: f64 = (0..5).map(|j| h[(p, j)] * h[(q, j)]).sum();
                let want = hh + lambda * inv[p][q];
                prop_assert!((a[(p, q)] - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
        }
        for i in 0..4 {
            for k in 0..3 {
                let want: f64 = (0..5).map(|j| x[(i, j)] * h[(k, j)]).sum();
                prop_assert!((c[(i, k)] - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn objective_and_lambda_recomposition(x in matrix(5, 7), m in matrix(5, 3), h in matrix(3, 7), lp in 0.01f64..1.0) {
        let logdet = det_cofactor(&shifted_gram_rows(&m, 0.1)).ln();
        let f = fit(&x, &m, &h);
        let lambda = 0.7;
        let minv = objective_value(&x, &m, &h, lambda, 0.1, VolumeSign::MinVol).unwrap();
        let maxv = objective_value(&x, &m, &h, lambda, 0.1, VolumeSign::MaxVol).unwrap();
        prop_assert!((minv - (f + lambda * logdet)).abs() <= 1e-9 * minv.abs().max(1.0));
        prop_assert!((maxv - (f - lambda * logdet)).abs() <= 1e-9 * maxv.abs().max(1.0));
        prop_assume!(logdet.abs() > 1e-6);
        let l = compute_lambda(&x, &m, &h, lp, 0.1).unwrap();
        let want = lp * f / logdet.abs();
        prop_assert!((l - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn determinant_equivalence_invariant(m in matrix(6, 3), h in matrix(3, 8), s in prop::collection::vec(-1.0f64..1.0, 9)) {
        let s = Matrix::new(3, 3, s).unwrap().add(&Matrix::identity(3).scale(2.0)).unwrap();
        let s_rows = to_rows(&s);
        prop_assume!(det_cofactor(&s_rows).abs() > 0.1);
        let s_inv = Matrix::from_rows(&inverse_gauss_jordan(&s_rows)).unwrap();
        let ms = m.matmul(&s).unwrap();
        let sh = s_inv.matmul(&h).unwrap();
        let det = |g: &Matrix| det_cofactor(&to_rows(g));
        let lhs = det(&ms.gram()) * det(&sh.gram_rows());
        let rhs = det(&m.gram()) * det(&h.gram_rows());
        prop_assert!((lhs - rhs).abs() <= 1e-7 * rhs.abs().max(1e-300), "{lhs} vs {rhs}");
    }
}

#[test]
fn h_step_matches_nnls_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let m = uniform(5, 3, &mut rng);
        let x = uniform(5, 8, &mut rng);
        let h0 = uniform(3, 8, &mut rng);
        let h = update_h_pfgm(&x, &m, &h0, ConstraintPlacement::NonnegOnly, 200).unwrap();
        let oracle = nnls_coordinate_descent(&m, &x, 5000);
        let (ours, best) = (fit(&x, &m, &h), fit(&x, &m, &oracle));
        assert!(ours <= best + 1e-6, "{ours} vs {best}");
        assert!(h.min() >= 0.0);
    }
}

#[test]
fn h_step_never_worse_than_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for placement in ConstraintPlacement::ALL {
        let m = uniform(6, 3, &mut rng);
        let x = uniform(6, 9, &mut rng);
        let h0 = volnmf::geometry::project_constraint(&uniform(3, 9, &mut rng), Factor::H, placement);
        let h = update_h_pfgm(&x, &m, &h0, placement, 7).unwrap();
        assert!(fit(&x, &m, &h) <= fit(&x, &m, &h0));
    }
}

#[test]
fn m_step_matches_row_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let b = uniform(4, 3, &mut rng);
        let a = b.gram().shifted(0.2);
        let c = uniform(4, 3, &mut rng).scale(2.0);
        let m0 = volnmf::geometry::project_constraint(
            &uniform(4, 3, &mut rng),
            Factor::M,
            ConstraintPlacement::MRowsSumOne,
        );
        let m = update_m_pfgm(&a, &c, &m0, ConstraintPlacement::MRowsSumOne, 300).unwrap();
        let ours = m_quadratic_value(&a, &c, &m);
        let grid = row_simplex_grid_min(&a, &c, 5e-3);
        assert!((ours - grid).abs() <= 1e-2, "{ours} vs {grid}");
        assert!(ours <= m_quadratic_value(&a, &c, &m0));
    }
}

#[test]
fn plain_nmf_recovers_exact_rank_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = uniform(6, 2, &mut rng);
    let h = volnmf::geometry::project_constraint(
        &uniform(2, 6, &mut rng),
        Factor::H,
        ConstraintPlacement::HColsSumOne,
    );
    let x = m.matmul(&h).unwrap();
    let cfg = SolverConfig {
        k: 2,
        lambda_prime: 0.0,
        max_outer: 2000,
        tol_objective: 0.0,
        ..SolverConfig::default()
    };
    let r = solve_best_of(&x, Method::Mvc, &cfg, 5).unwrap();
    assert!(
        fit(&x, &r.m, &r.h) <= 1e-6 * frobenius_norm_sq(&x),
        "{}",
        fit(&x, &r.m, &r.h)
    );
}

#[test]
fn histories_non_increasing_for_every_placement() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = uniform(7, 12, &mut rng);
    for placement in ConstraintPlacement::ALL {
        for method in [Method::Mvc, Method::Mav] {
            for lp in [0.0, 0.05, 0.5] {
                let cfg = SolverConfig {
                    lambda_prime: lp,
                    placement,
                    max_outer: 60,
                    inner_iter: 10,
                    ..SolverConfig::default()
                };
                let r = solve(&x, method, &cfg).unwrap();
                assert!(
                    is_non_increasing(&r.objective_history, 1e-9),
                    "{method} {placement} {lp}"
                );
                assert!(volnmf::solver::feasibility_error(&r, placement) <= 1e-9);
            }
        }
    }
}

#[test]
fn solves_are_bit_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = uniform(6, 20, &mut rng);
    let cfg = SolverConfig {
        max_outer: 40,
        seed: 4,
        ..SolverConfig::default()
    };
    for method in [Method::Mvc, Method::Mav] {
        assert_eq!(solve(&x, method, &cfg).unwrap(), solve(&x, method, &cfg).unwrap());
        assert_eq!(
            solve_best_of(&x, method, &cfg, 3).unwrap(),
            solve_best_of(&x, method, &cfg, 3).unwrap()
        );
    }
}

#[test]
fn mav_is_a_relabelled_transposed_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = uniform(6, 15, &mut rng);
    let cfg = SolverConfig {
        max_outer: 50,
        ..SolverConfig::default()
    };
    let mav = solve_mav(&x, &cfg).unwrap();
    let inner = solve_volreg(
        &x.transpose(),
        &SolverConfig {
            placement: ConstraintPlacement::MRowsSumOne,
            ..cfg.clone()
        },
        None,
    )
    .unwrap();
    assert_eq!(mav.m, inner.h.transpose());
    assert_eq!(mav.h, inner.m.transpose());
    assert_eq!(mav.fit_history, inner.fit_history);
    assert_eq!(fit(&x, &mav.m, &mav.h), fit(&x.transpose(), &inner.m, &inner.h));
    for s in mav.h.col_sums() {
        assert!((s - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn initialization_matches_data_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = uniform(5, 9, &mut rng).scale(7.0);
    for placement in ConstraintPlacement::ALL {
        let (m, h) = init_factors(&x, 3, 1, placement).unwrap();
        let approx = m.matmul(&h).unwrap().mean();
        assert!((approx - x.mean()).abs() <= 1e-12 * x.mean());
    }
}
