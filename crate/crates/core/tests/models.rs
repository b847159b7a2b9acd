use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tractafair::models::logistic::objective;
use tractafair::models::{GnbModel, LinearRegressionModel, LogisticConfig, LogisticModel, SvmConfig, SvmModel};
use tractafair::Matrix;

fn random_problem(seed: u64, n: usize, d: usize) -> (Matrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.5..0.5);
        y.push(usize::from(z > 0.0));
        rows.push(x);
    }
    (Matrix::from_rows(&rows), y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn logistic_objective_never_increases(seed in any::<u64>(), n in 10usize..80, d in 1usize..6, lambda in 0.01f64..2.0) {
        let (x, y) = random_problem(seed, n, d);
        let config = LogisticConfig { lambda, ..LogisticConfig::default() };
        let (model, trace) = LogisticModel::fit_traced(&x, &y, &config).unwrap();
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", trace);
        // The trace tracks the objective actually reached.
        let direct = objective(&x, &y, &model.weights, model.bias, lambda);
        let last = *trace.last().unwrap();
        prop_assert!((last - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{} vs {}", last, direct);
    }

    #[test]
    fn least_squares_residuals_are_orthogonal(seed in any::<u64>(), n in 8usize..60, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() + rng.random_range(-1.0..1.0)).collect();
        let x = Matrix::from_rows(&rows);
        let pred = LinearRegressionModel::fit(&x, &y).unwrap().predict(&x).unwrap();
        let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        prop_assert!(resid.iter().sum::<f64>().abs() <= 1e-6);
        for c in 0..d {
            let dot: f64 = resid.iter().zip(x.column(c)).map(|(r, v)| r * v).sum();
            prop_assert!(dot.abs() <= 1e-6, "column {}: {}", c, dot);
        }
    }

    #[test]
    fn naive_bayes_posteriors_sum_to_one(seed in any::<u64>(), n in 6usize..60, d in 1usize..5) {
        let (x, y) = random_problem(seed, n, d);
        prop_assume!(y.contains(&0) && y.contains(&1));
        let model = GnbModel::fit(&x, &y).unwrap();
        for p in model.posteriors(&x).unwrap() {
            prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn svm_ignores_row_order() {
    let grid: Vec<Vec<f64>> = (0..11)
        .flat_map(|i| (0..11).map(move |j| vec![-1.0 + 0.2 * i as f64, -1.0 + 0.2 * j as f64]))
        .collect();
    let grid = Matrix::from_rows(&grid);
    let config = SvmConfig {
        tol: 1e-9,
        ..SvmConfig::default()
    };
    for seed in 0..5 {
        let (x, y) = random_problem(seed, 120, 2);
        let mut order: Vec<usize> = (0..x.rows()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 50));
        let permuted_y: Vec<usize> = order.iter().map(|&i| y[i]).collect();
        let a = SvmModel::fit(&x, &y, &config).unwrap();
        let b = SvmModel::fit(&x.select_rows(&order), &permuted_y, &config).unwrap();
        let (da, db) = (a.decision_function(&grid).unwrap(), b.decision_function(&grid).unwrap());
        let (pa, pb) = (a.predict_proba(&grid).unwrap(), b.predict_proba(&grid).unwrap());
        for i in 0..grid.rows() {
            assert!(
                (da[i] - db[i]).abs() <= 1e-6,
                "seed {seed}: decision {} vs {}",
                da[i],
                db[i]
            );
            assert!(
                (pa[i] - pb[i]).abs() <= 1e-6,
                "seed {seed}: probability {} vs {}",
                pa[i],
                pb[i]
            );
        }
    }
}
