use gradecast::matrix::Matrix;
use gradecast::nn::{Activation, TrainConfig};
use gradecast::regressors::{fit_knn, fit_linear_regression};
use gradecast::rng::SeededRng;
use gradecast::vae::{extract_latent, vae_train_matrix, LatentMode, VaeConfig};

fn linear_problem(seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = SeededRng::new(seed);
    let x = Matrix::from_fn(50, 3, |_, _| rng.normal());
    let y = x
        .row_iter()
        .map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.25 * r[2] + 4.0)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|v| v + 0.1 * rng.normal())
        .collect();
    (x, y)
}

/// Full-batch gradient descent on the mean squared error.
fn gd_oracle(x: &Matrix, y: &[f64]) -> (Vec<f64>, f64) {
    let (n, d) = (x.rows(), x.cols());
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for _ in 0..20_000 {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, t) in x.row_iter().zip(y) {
            let e = r.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b - t;
            for j in 0..d {
                gw[j] += 2.0 * e * r[j] / n as f64;
            }
            gb += 2.0 * e / n as f64;
        }
        for j in 0..d {
            w[j] -= 0.1 * gw[j];
        }
        b -= 0.1 * gb;
    }
    (w, b)
}

#[test]
fn least_squares_agrees_with_gradient_descent() {
    for seed in 0..3 {
        let (x, y) = linear_problem(seed);
        let m = fit_linear_regression(&x, &y).unwrap();
        let (w, b) = gd_oracle(&x, &y);
        for (a, o) in m.coef.iter().zip(&w) {
            assert!((a - o).abs() < 1e-4, "{a} vs {o}");
        }
        assert!((m.intercept - b).abs() < 1e-4);
    }
}

#[test]
fn knn_matches_brute_force() {
    let mut rng = SeededRng::new(40);
    let x = Matrix::from_fn(40, 2, |_, j| rng.uniform_range(0.0, 10.0 * (j + 1) as f64));
    let y: Vec<f64> = (0..40).map(|_| rng.uniform_range(0.0, 100.0)).collect();
    let m = fit_knn(&x, &y, 5).unwrap();
    let cols: Vec<(f64, f64)> = (0..2)
        .map(|j| {
            let c = x.column(j);
            let mean = c.iter().sum::<f64>() / 40.0;
            let sd = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 40.0).sqrt();
            (mean, sd)
        })
        .collect();
    for _ in 0..20 {
        let q = [rng.uniform_range(0.0, 10.0), rng.uniform_range(0.0, 20.0)];
        let mut d: Vec<(f64, usize)> = (0..40)
            .map(|i| {
                let s: f64 = (0..2)
                    .map(|j| ((x[(i, j)] - q[j]) / cols[j].1).powi(2))
                    .sum();
                (s, i)
            })
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = d[..5].iter().map(|(_, i)| y[*i]).sum::<f64>() / 5.0;
        assert!((m.predict_row(&q).unwrap() - want).abs() < 1e-9);
    }
}

fn correlated_pair(n: usize, rho: f64, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let a = rng.normal();
            let b = rho * a + (1.0 - rho * rho).sqrt() * rng.normal();
            vec![10.0 * a + 50.0, 5.0 * b + 20.0]
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

/// Mean per-coordinate residual of the best rank-1 reconstruction of the
/// standardized data.
fn pca1_residual(x: &Matrix) -> f64 {
    let n = x.rows() as f64;
    let z: Vec<Vec<f64>> = (0..2)
        .map(|j| {
            let c = x.column(j);
            let m = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            c.iter().map(|v| (v - m) / sd).collect()
        })
        .collect();
    let r = z[0].iter().zip(&z[1]).map(|(a, b)| a * b).sum::<f64>() / n;
    // Correlation matrix eigenvalues are 1 ± r.
    (1.0 - r.abs()) / 2.0
}

#[test]
fn linear_vae_without_kl_approaches_pca() {
    let x = correlated_pair(300, 0.8, 3);
    let cfg = VaeConfig {
        latent_dim: 1,
        hidden: vec![],
        activation: Activation::Identity,
        kl_weight: 0.0,
        train: TrainConfig {
            learning_rate: 1e-2,
            epochs: 300,
            seed: 1,
            ..TrainConfig::default()
        },
    };
    let vae = vae_train_matrix(&x, &cfg).unwrap();
    let got = vae.reconstruction_mse(&x).unwrap();
    let oracle = pca1_residual(&x);
    assert!(got <= 1.1 * oracle, "vae {got} vs pca {oracle}");
}

#[test]
fn heavy_kl_collapses_to_prior() {
    let x = correlated_pair(200, 0.5, 4);
    let cfg = VaeConfig {
        kl_weight: 1e6,
        train: TrainConfig {
            learning_rate: 1e-4,
            epochs: 3000,
            seed: 2,
            ..TrainConfig::default()
        },
        ..VaeConfig::default()
    };
    let vae = vae_train_matrix(&x, &cfg).unwrap();
    // Adam jitters around the optimum by roughly the learning rate per
    // parameter, hence the small learning rate.
    for l in vae.latents(&x, 0).unwrap() {
        for k in 0..2 {
            assert!(l.mu[k].abs() < 0.02, "mu {:?}", l.mu);
            assert!(l.log_sigma[k].abs() < 0.02, "log sigma {:?}", l.log_sigma);
        }
    }
}

#[test]
fn vae_training_is_deterministic() {
    let x = correlated_pair(64, 0.3, 5);
    let cfg = VaeConfig {
        train: TrainConfig {
            epochs: 10,
            seed: 9,
            ..TrainConfig::default()
        },
        ..VaeConfig::default()
    };
    let a = vae_train_matrix(&x, &cfg).unwrap();
    let b = vae_train_matrix(&x, &cfg).unwrap();
    assert_eq!(a, b);
    let la = extract_latent(&a, &x, LatentMode::Sample, 3).unwrap();
    let lb = extract_latent(&b, &x, LatentMode::Sample, 3).unwrap();
    assert_eq!(la, lb);
}
