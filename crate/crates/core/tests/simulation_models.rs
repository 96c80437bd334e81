//! The Gaussian examples against dense linear algebra and series oracles.

use dwsvm_core::evaluation::misclass_rate;
use dwsvm_core::rng::{stream_id, Role};
use dwsvm_core::simgen::{
    bayes_error, bayes_rule, make_example1, make_example2, sample, sample_streams, Covariance, GaussianClassModel,
};
use nalgebra::{DMatrix, DVector};

/// `Phi(x)` from the Maclaurin series of `erf`, independent of `libm`.
fn phi_series(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let mut term = z;
    let mut sum = z;
    for k in 1..200 {
        term *= -z * z / k as f64;
        sum += term / (2 * k + 1) as f64;
    }
    0.5 * (1.0 + 2.0 / std::f64::consts::PI.sqrt() * sum)
}

fn dense_sigma(model: &GaussianClassModel) -> DMatrix<f64> {
    let d = model.dim();
    match *model.covariance() {
        Covariance::Identity => DMatrix::identity(d, d),
        Covariance::InterchangeableBlocks { block, diag, offdiag } => DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                diag
            } else if i / block == j / block {
                offdiag
            } else {
                0.0
            }
        }),
        Covariance::Dense(ref m) => DMatrix::from_row_slice(d, d, m),
    }
}

#[test]
fn series_oracle_agrees_with_bayes_error() {
    let expected = phi_series(-1.35);
    assert!((expected - 0.088508).abs() < 1e-6, "{expected}");
    for d in [1, 100, 1000] {
        assert!((bayes_error(&make_example1(d).unwrap()) - expected).abs() < 1e-12);
    }
    for d in [50, 300] {
        assert!((bayes_error(&make_example2(d).unwrap()) - expected).abs() < 1e-12);
    }
}

#[test]
fn both_examples_have_mahalanobis_distance_2_7() {
    for d in [50, 100, 300] {
        for model in [make_example1(d).unwrap(), make_example2(d).unwrap()] {
            let sigma = dense_sigma(&model);
            let two_mu = DVector::from_iterator(d, model.mu().iter().map(|m| 2.0 * m));
            let solved = sigma.clone().cholesky().unwrap().solve(&two_mu);
            let dense = two_mu.dot(&solved).sqrt();
            assert!((dense - 2.7).abs() < 1e-9, "d {d}: {dense}");
            assert!((model.mahalanobis() - 2.7).abs() < 1e-9);
        }
    }
}

#[test]
fn bayes_direction_matches_dense_solve() {
    let model = make_example2(100).unwrap();
    let sigma = dense_sigma(&model);
    let mu = DVector::from_column_slice(model.mu());
    let w = sigma.cholesky().unwrap().solve(&mu).normalize();
    let rule = bayes_rule(&model);
    for (a, b) in rule.direction.iter().zip(w.iter()) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(rule.intercept, 0.0);
}

#[test]
fn block_sampler_reproduces_the_block_covariance() {
    let model = make_example2(50).unwrap();
    let data = sample(&model, 20_000, 1, 9).unwrap();
    let n = 20_000.0;
    let mu = model.mu();
    let (mut var, mut cov) = (0.0, 0.0);
    for i in 0..20_000 {
        let x = data.row(i);
        var += (x[0] - mu[0]).powi(2) / n;
        cov += (x[3] - mu[3]) * (x[7] - mu[7]) / n;
    }
    assert!((var - 1.0).abs() < 0.05, "{var}");
    assert!((cov - 0.8).abs() < 0.05, "{cov}");
}

#[test]
fn dense_covariance_matches_block_form() {
    let blocks = make_example2(100).unwrap();
    let dense = GaussianClassModel::new(
        blocks.mu().to_vec(),
        Covariance::Dense(dense_sigma(&blocks).as_slice().to_vec()),
    )
    .unwrap();
    assert!((dense.mahalanobis() - blocks.mahalanobis()).abs() < 1e-10);
    let a = bayes_rule(&blocks).direction;
    let b = bayes_rule(&dense).direction;
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn bayes_rule_test_error_is_near_phi() {
    let model = make_example1(100).unwrap();
    let rule = bayes_rule(&model);
    let mut mean = 0.0;
    for seed in 0..20u64 {
        let test = sample_streams(&model, 2000, 2000, seed, (stream_id(0, Role::TestPlus), stream_id(0, Role::TestMinus))).unwrap();
        mean += misclass_rate(&rule, &test).unwrap() / 20.0;
    }
    assert!((mean - phi_series(-1.35)).abs() <= 0.006, "{mean}");
}

#[test]
fn seeds_change_samples_not_models() {
    let model = make_example2(50).unwrap();
    let a = sample(&model, 5, 5, 1).unwrap();
    let b = sample(&model, 5, 5, 2).unwrap();
    assert_ne!(a.features(), b.features());
    assert_eq!(make_example2(50).unwrap(), model);
    assert_eq!(sample(&model, 5, 5, 1).unwrap(), a);
}
