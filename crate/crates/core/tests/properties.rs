use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use vecshap::game::{Attribution, VectorGame};
use vecshap::gaussian::{shap_linear_independent, ConditionalMatrixSet, GaussianInput, LinearPredictor};
use vecshap::io;
use vecshap::predictor::{empirical_moments, explain, BackgroundSample, FnPredictor, Predictor};
use vecshap::random::{random_game, random_spd, trial_rng, uniform_vec};
use vecshap::shapley::{harsanyi_dividends, shapley_permutation, shapley_subset, shapley_via_unanimity};
use vecshap::similarity::{cosine_similarity, spearman_correlation};

fn game(seed: u64, n: usize, m: usize) -> VectorGame {
    random_game(&mut trial_rng(seed, 0), n, m).unwrap()
}

fn close(a: &Attribution, b: &Attribution, tol: f64) -> bool {
    a.max_abs_diff(b).unwrap() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_matches_permutation(seed: u64, n in 1usize..=7, m in 1usize..=3) {
        let v = game(seed, n, m);
        prop_assert!(close(&shapley_subset(&v), &shapley_permutation(&v).unwrap(), 1e-10));
    }

    #[test]
    fn scalar_dividends_route_agrees(seed: u64, n in 1usize..=8) {
        let v = game(seed, n, 1);
        prop_assert!(close(&shapley_subset(&v), &shapley_via_unanimity(&v).unwrap(), 1e-9));
        // dividends reassemble the game
        let d = harsanyi_dividends(&v).unwrap();
        for mask in 0..1u32 << n {
            let rebuilt: f64 = (0..1u32 << n).filter(|t| t & mask == *t).map(|t| d[t as usize]).sum();
            prop_assert!((rebuilt - v.value(mask)[0]).abs() <= 1e-9);
        }
    }

    #[test]
    fn linear_in_the_game(seed: u64, n in 1usize..=6, m in 1usize..=3, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (u, v) = (game(seed, n, m), game(seed ^ 0x9e37, n, m));
        let lhs = shapley_subset(&VectorGame::combine(a, &u, b, &v).unwrap());
        let (pu, pv) = (shapley_subset(&u), shapley_subset(&v));
        let rhs: Vec<f64> = pu.as_flat().iter().zip(pv.as_flat()).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(close(&lhs, &Attribution::from_flat(n, m, rhs).unwrap(), 1e-10));
    }

    #[test]
    fn coordinatewise(seed: u64, n in 1usize..=6, m in 1usize..=4) {
        let v = game(seed, n, m);
        let full = shapley_subset(&v);
        for k in 0..m {
            let scalar = shapley_subset(&v.project(k).unwrap());
            for i in 0..n {
                prop_assert!((full.row(i)[k] - scalar.row(i)[0]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn direct_sum_of_embeddings(seed: u64, n in 1usize..=6, m in 1usize..=4) {
        let v = game(seed, n, m);
        let mut rebuilt = VectorGame::zero(n, m).unwrap();
        for k in 0..m {
            let e = VectorGame::embed(&v.project(k).unwrap(), k, m).unwrap();
            rebuilt = VectorGame::combine(1.0, &rebuilt, 1.0, &e).unwrap();
            prop_assert_eq!(e.project(k).unwrap(), v.project(k).unwrap());
        }
        prop_assert_eq!(rebuilt, v);
    }

    #[test]
    fn norm_laws(seed: u64, n in 1usize..=6, m in 1usize..=3, c in -5.0f64..5.0) {
        let (u, v) = (game(seed, n, m), game(seed.wrapping_add(1), n, m));
        let scaled = VectorGame::combine(c, &u, 0.0, &u).unwrap();
        prop_assert!((scaled.sup_norm() - c.abs() * u.sup_norm()).abs() <= 1e-12);
        let sum = VectorGame::combine(1.0, &u, 1.0, &v).unwrap();
        prop_assert!(sum.sup_norm() <= u.sup_norm() + v.sup_norm() + 1e-12);
        prop_assert!(u.marginal_seminorm() <= 2.0 * u.sup_norm() + 1e-12);
        prop_assert!(shapley_subset(&u).norm() <= u.marginal_seminorm() + 1e-12);
    }

    #[test]
    fn relabelling(seed: u64, n in 1usize..=6, m in 1usize..=3, shift in 0usize..6) {
        let v = game(seed, n, m);
        let perm: Vec<usize> = (0..n).map(|p| (p + shift) % n).collect();
        let w = v.relabel(&perm).unwrap();
        prop_assert!((w.marginal_seminorm() - v.marginal_seminorm()).abs() <= 1e-12);
        let (a, b) = (shapley_subset(&v), shapley_subset(&w));
        for p in 0..n {
            for k in 0..m {
                prop_assert!((a.row(p)[k] - b.row(perm[p])[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cosine_ignores_positive_scale(xs in prop::collection::vec(0.01f64..10.0, 1..12), c in 0.01f64..100.0) {
        let ys: Vec<f64> = xs.iter().map(|x| c * x).collect();
        prop_assert!((cosine_similarity(&xs, &ys).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spearman_ignores_monotone_maps(xs in prop::collection::vec(-5.0f64..5.0, 2..12), ys in prop::collection::vec(-5.0f64..5.0, 12)) {
        let ys = &ys[..xs.len()];
        prop_assume!(xs.iter().any(|x| *x != xs[0]) && ys.iter().any(|y| *y != ys[0]));
        let cubed: Vec<f64> = xs.iter().map(|x| x * x * x + x).collect();
        let r = spearman_correlation(&xs, ys).unwrap();
        prop_assert!((r - spearman_correlation(&cubed, ys).unwrap()).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn attribution_csv_round_trip(seed: u64, n in 1usize..=8, m in 1usize..=4) {
        let mut rng = trial_rng(seed, 3);
        let flat: Vec<f64> = (0..n * m).map(|_| rng.random_range(-1e6..1e6) * rng.random::<f64>()).collect();
        let a = Attribution::from_flat(n, m, flat).unwrap();
        let text = io::attribution_csv_string(&a, None, &[("path", "exact".into())], 1.5e-17);
        let (back, meta) = io::parse_attribution_csv(text.as_bytes()).unwrap();
        prop_assert_eq!(back, a);
        prop_assert_eq!(meta.comment("path"), Some("exact"));
        prop_assert_eq!(meta.sum_check(), Some(1.5e-17));
    }

    #[test]
    fn game_json_round_trip(seed: u64, n in 1usize..=5, m in 1usize..=3) {
        let v = game(seed, n, m);
        prop_assert_eq!(io::parse_game(&io::game_to_json(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn attribution_matrices_partition_identity(seed: u64, n in 1usize..=7) {
        let mut rng = trial_rng(seed, 4);
        let g = GaussianInput::new(vec![0.0; n], random_spd(&mut rng, n, 1e-2)).unwrap();
        let mats = ConditionalMatrixSet::new(&g).unwrap().attribution_matrices().unwrap();
        let total = mats.iter().fold(DMatrix::zeros(n, n), |acc, mi| acc + mi);
        prop_assert!((total - DMatrix::<f64>::identity(n, n)).amax() <= 1e-9);
    }

    #[test]
    fn interventional_linear_matches_closed_form(seed: u64, n in 1usize..=6, m in 1usize..=3) {
        let mut rng = trial_rng(seed, 5);
        let p = LinearPredictor::new(
            uniform_vec(&mut rng, m, -1.0, 1.0),
            DMatrix::from_fn(n, m, |_, _| rng.random_range(-2.0..2.0)),
        ).unwrap();
        let rows: Vec<Vec<f64>> = (0..20).map(|_| uniform_vec(&mut rng, n, -1.0, 1.0)).collect();
        let bg = BackgroundSample::from_rows(&rows).unwrap();
        let x = uniform_vec(&mut rng, n, -2.0, 2.0);
        // with μ set to the background means the diagonal formula B[i,k](x_i − μ_i) is exact
        let g = GaussianInput::new(bg.column_means(), DMatrix::identity(n, n)).unwrap();
        let e = explain(&p, &bg, &x).unwrap();
        prop_assert!(close(&e.attribution, &shap_linear_independent(&p, &g, &x).unwrap(), 1e-10));
    }

    #[test]
    fn ignored_feature_gets_nothing(seed: u64, n in 2usize..=6, skip in 0usize..6) {
        let skip = skip % n;
        let mut rng = trial_rng(seed, 6);
        let w = uniform_vec(&mut rng, n, -1.0, 1.0);
        let f = FnPredictor::new(n, 2, move |z: &[f64]| {
            let s: f64 = (0..z.len()).filter(|&j| j != skip).map(|j| w[j] * z[j]).sum();
            vec![s.sin(), s * s]
        });
        let rows: Vec<Vec<f64>> = (0..10).map(|_| uniform_vec(&mut rng, n, -1.0, 1.0)).collect();
        let bg = BackgroundSample::from_rows(&rows).unwrap();
        let e = explain(&f, &bg, &uniform_vec(&mut rng, n, -1.0, 1.0)).unwrap();
        prop_assert!(e.attribution.row(skip).iter().all(|x| x.abs() <= 1e-12));
        prop_assert!(e.efficiency_residual() <= 1e-10);
        prop_assert_eq!(f.n_outputs(), 2);
    }
}

#[test]
fn empirical_moments_converge() {
    let mut rng = trial_rng(11, 0);
    let n = 3;
    let sigma = random_spd(&mut rng, n, 0.1);
    let chol = sigma.clone().cholesky().unwrap().l();
    let mu = [0.5, -1.0, 2.0];
    let rows: Vec<Vec<f64>> = (0..10_000)
        .map(|_| {
            let z = nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let y = &chol * z;
            (0..n).map(|i| mu[i] + y[i]).collect()
        })
        .collect();
    let est = empirical_moments(&BackgroundSample::from_rows(&rows).unwrap()).unwrap();
    assert!(!est.ridged);
    let scale = sigma.amax();
    for i in 0..n {
        assert!((est.input.mu()[i] - mu[i]).abs() < 0.1 * scale.sqrt());
    }
    assert!((est.input.sigma() - &sigma).amax() < 0.1 * scale);
}
