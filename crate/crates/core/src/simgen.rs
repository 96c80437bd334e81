//! Two-class Gaussian simulation models `N(+mu, Sigma)` vs `N(-mu, Sigma)`.
//!
//! Both simulation families are scaled so that the Mahalanobis distance
//! between the class means is 2.7. The Bayes rule (equal priors) has
//! direction proportional to `Sigma^{-1} mu`, intercept 0 and error
//! `Phi(-Delta / 2)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{dot, norm, Label, LabeledDataset, LinearModel};
use crate::error::{check_dim, invalid, Error, Result};
use crate::rng::{stream_rng, SimRng};

/// Mahalanobis distance between the class means used by both examples.
pub const TARGET_MAHALANOBIS: f64 = 2.7;
/// Block size of the interchangeable covariance in the second example.
pub const EXAMPLE2_BLOCK: usize = 50;
pub const EXAMPLE2_RHO: f64 = 0.8;

/// Covariance matrices in structured form.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    Identity,
    /// Block-diagonal with equal `block x block` blocks having `diag` on the
    /// diagonal and `offdiag` elsewhere (compound symmetry).
    InterchangeableBlocks { block: usize, diag: f64, offdiag: f64 },
    /// Row-major `d x d` symmetric matrix.
    Dense(Vec<f64>),
}

impl Covariance {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Covariance::Identity => Ok(()),
            &Covariance::InterchangeableBlocks { block, diag, offdiag } => {
                if block == 0 || !d.is_multiple_of(block) {
                    return Err(invalid("dimension must be a multiple of the block size"));
                }
                let b = block as f64;
                if !(diag - offdiag > 0.0 && diag + (b - 1.0) * offdiag > 0.0) {
                    return Err(Error::InvalidModel("interchangeable block is not positive definite".into()));
                }
                Ok(())
            }
            Covariance::Dense(m) => {
                check_dim(d * d, m.len())?;
                cholesky(m, d).map(|_| ())
            }
        }
    }

    /// `Sigma^{-1} v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Covariance::Identity => Ok(v.to_vec()),
            &Covariance::InterchangeableBlocks { block, diag, offdiag } => {
                let b = block as f64;
                let a = diag - offdiag;
                let k = offdiag / (a + b * offdiag);
                let mut out = Vec::with_capacity(v.len());
                for chunk in v.chunks(block) {
                    let s: f64 = chunk.iter().sum();
                    out.extend(chunk.iter().map(|&x| (x - k * s) / a));
                }
                Ok(out)
            }
            Covariance::Dense(m) => {
                let d = v.len();
                let l = cholesky(m, d)?;
                Ok(cholesky_solve(&l, d, v))
            }
        }
    }
}

/// Class means `+-mu` with shared covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassModel {
    mu: Vec<f64>,
    covariance: Covariance,
    mahalanobis: f64,
}

impl GaussianClassModel {
    pub fn new(mu: Vec<f64>, covariance: Covariance) -> Result<Self> {
        if mu.is_empty() || mu.iter().any(|m| !m.is_finite()) {
            return Err(invalid("mean vector must be nonempty and finite"));
        }
        covariance.validate(mu.len())?;
        let two_mu: Vec<f64> = mu.iter().map(|m| 2.0 * m).collect();
        let mahalanobis = libm::sqrt(dot(&two_mu, &covariance.solve(&two_mu)?));
        Ok(Self {
            mu,
            covariance,
            mahalanobis,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    /// `{(2 mu)' Sigma^{-1} (2 mu)}^{1/2}`.
    pub fn mahalanobis(&self) -> f64 {
        self.mahalanobis
    }
}

/// Constant mean difference `mu = c 1_d`, identity covariance, `c = 1.35 / sqrt(d)`.
pub fn make_example1(d: usize) -> Result<GaussianClassModel> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let c = 0.5 * TARGET_MAHALANOBIS / libm::sqrt(d as f64);
    GaussianClassModel::new(vec![c; d], Covariance::Identity)
}

/// Decreasing mean difference `mu = c (sqrt 50, sqrt 49, ..., 1, 0, ...)` with
/// block-diagonal interchangeable covariance (blocks of 50, diagonal 1,
/// off-diagonal 0.8).
pub fn make_example2(d: usize) -> Result<GaussianClassModel> {
    if d < EXAMPLE2_BLOCK || !d.is_multiple_of(EXAMPLE2_BLOCK) {
        return Err(invalid("example 2 needs a positive dimension divisible by 50"));
    }
    let mut v = vec![0.0; d];
    for (k, vk) in v.iter_mut().take(EXAMPLE2_BLOCK).enumerate() {
        *vk = libm::sqrt((EXAMPLE2_BLOCK - k) as f64);
    }
    let covariance = Covariance::InterchangeableBlocks {
        block: EXAMPLE2_BLOCK,
        diag: 1.0,
        offdiag: EXAMPLE2_RHO,
    };
    let quad = dot(&v, &covariance.solve(&v)?);
    let c = 0.5 * TARGET_MAHALANOBIS / libm::sqrt(quad);
    v.iter_mut().for_each(|x| *x *= c);
    GaussianClassModel::new(v, covariance)
}

/// Draws `n_plus` from `N(mu, Sigma)` and `n_minus` from `N(-mu, Sigma)`,
/// positives first. Uses streams 0 and 1 of `seed`.
pub fn sample(model: &GaussianClassModel, n_plus: usize, n_minus: usize, seed: u64) -> Result<LabeledDataset> {
    sample_streams(model, n_plus, n_minus, seed, (0, 1))
}

/// As [`sample`], with explicit stream ids for the two classes.
pub fn sample_streams(
    model: &GaussianClassModel,
    n_plus: usize,
    n_minus: usize,
    seed: u64,
    streams: (u64, u64),
) -> Result<LabeledDataset> {
    if n_plus + n_minus == 0 {
        return Err(invalid("at least one observation must be drawn"));
    }
    let sampler = Sampler::new(model)?;
    let d = model.dim();
    let mut features = Vec::with_capacity((n_plus + n_minus) * d);
    let mut labels = Vec::with_capacity(n_plus + n_minus);
    for (label, count, stream) in [(Label::Pos, n_plus, streams.0), (Label::Neg, n_minus, streams.1)] {
        let mut rng = stream_rng(seed, stream);
        for _ in 0..count {
            sampler.draw(label.sign(), &mut rng, &mut features);
            labels.push(label);
        }
    }
    LabeledDataset::new(features, labels, d)
}

enum Factor {
    Identity,
    Blocks { block: usize, lower: Vec<f64> },
    Dense(Vec<f64>),
}

struct Sampler<'m> {
    model: &'m GaussianClassModel,
    factor: Factor,
    z: core::cell::RefCell<Vec<f64>>,
}

impl<'m> Sampler<'m> {
    fn new(model: &'m GaussianClassModel) -> Result<Self> {
        let factor = match model.covariance() {
            Covariance::Identity => Factor::Identity,
            &Covariance::InterchangeableBlocks { block, diag, offdiag } => {
                let mut m = vec![offdiag; block * block];
                for i in 0..block {
                    m[i * block + i] = diag;
                }
                Factor::Blocks {
                    block,
                    lower: cholesky(&m, block)?,
                }
            }
            Covariance::Dense(m) => Factor::Dense(cholesky(m, model.dim())?),
        };
        Ok(Self {
            model,
            factor,
            z: core::cell::RefCell::new(vec![0.0; model.dim()]),
        })
    }

    fn draw(&self, sign: f64, rng: &mut SimRng, out: &mut Vec<f64>) {
        let mut z = self.z.borrow_mut();
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let mu = self.model.mu();
        match &self.factor {
            Factor::Identity => out.extend(mu.iter().zip(z.iter()).map(|(m, e)| sign * m + e)),
            Factor::Blocks { block, lower } => {
                for (mb, zb) in mu.chunks(*block).zip(z.chunks(*block)) {
                    lower_times(lower, *block, zb, mb, sign, out);
                }
            }
            Factor::Dense(lower) => lower_times(lower, mu.len(), &z, mu, sign, out),
        }
    }
}

fn lower_times(lower: &[f64], n: usize, z: &[f64], mu: &[f64], sign: f64, out: &mut Vec<f64>) {
    for i in 0..n {
        let row = &lower[i * n..i * n + i + 1];
        out.push(sign * mu[i] + dot(row, &z[..=i]));
    }
}

/// Lower-triangular Cholesky factor (row-major) of a symmetric positive-definite matrix.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    check_dim(n * n, a.len())?;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::InvalidModel("covariance is not positive definite".into()));
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - dot(&l[i * n..i * n + i], &y[..i])) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Bayes rule for equal priors: direction `Sigma^{-1} mu / ||.||`, intercept 0.
pub fn bayes_rule(model: &GaussianClassModel) -> LinearModel {
    let mut w = model
        .covariance()
        .solve(model.mu())
        .expect("validated at construction");
    let nrm = norm(&w);
    w.iter_mut().for_each(|x| *x /= nrm);
    LinearModel::new(w, 0.0, None)
}

/// `Phi(-Delta / 2)`.
pub fn bayes_error(model: &GaussianClassModel) -> f64 {
    normal_cdf(-0.5 * model.mahalanobis())
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// One positive observation at `x0` and `n_minus` negatives uniform on
/// `[-m, 0]`, in one dimension. The negatives come from `stream` of `seed`.
pub fn imbalance_dataset(x0: f64, n_minus: usize, m: f64, seed: u64, stream: u64) -> Result<LabeledDataset> {
    if n_minus == 0 || !(m > 0.0) {
        return Err(invalid("need at least one negative and a positive support width"));
    }
    let mut rng = stream_rng(seed, stream);
    let mut features = Vec::with_capacity(n_minus + 1);
    let mut labels = Vec::with_capacity(n_minus + 1);
    features.push(x0);
    labels.push(Label::Pos);
    for _ in 0..n_minus {
        let u: f64 = rng.random();
        features.push(-m * u);
        labels.push(Label::Neg);
    }
    LabeledDataset::new(features, labels, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_scaling() {
        let m = make_example1(300).unwrap();
        assert!((m.mu()[0] - 0.077_942_29).abs() < 5e-9);
        assert!((m.mahalanobis() - 2.7).abs() < 1e-9);
        let m1 = make_example1(1).unwrap();
        assert!((m1.mu()[0] - 1.35).abs() < 1e-15);
        assert!(make_example1(0).is_err());
    }

    #[test]
    fn example2_structure() {
        let m = make_example2(100).unwrap();
        assert_eq!(m.mu().iter().filter(|&&x| x != 0.0).count(), 50);
        assert!((m.mahalanobis() - 2.7).abs() < 1e-9);
        assert!(make_example2(120).is_err());
        assert!(make_example2(0).is_err());
    }

    #[test]
    fn block_validation() {
        let bad = Covariance::InterchangeableBlocks {
            block: 5,
            diag: 1.0,
            offdiag: -0.3,
        };
        assert!(GaussianClassModel::new(vec![1.0; 5], bad).is_err());
        let dense_bad = Covariance::Dense(vec![1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianClassModel::new(vec![1.0, 0.0], dense_bad).is_err());
    }

    #[test]
    fn bayes_examples() {
        let m = make_example1(4).unwrap();
        let rule = bayes_rule(&m);
        for w in &rule.direction {
            assert!((w - 0.5).abs() < 1e-15);
        }
        assert_eq!(rule.intercept, 0.0);
        let m = GaussianClassModel::new(vec![3.0, 4.0], Covariance::Identity).unwrap();
        assert_eq!(bayes_rule(&m).direction, vec![0.6, 0.8]);
        let zero = GaussianClassModel::new(vec![0.0, 0.0], Covariance::Identity).unwrap();
        assert_eq!(bayes_error(&zero), 0.5);
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = make_example2(50).unwrap();
        let a = sample(&m, 3, 2, 11).unwrap();
        let b = sample(&m, 3, 2, 11).unwrap();
        let c = sample(&m, 3, 2, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!((a.n_plus(), a.n_minus()), (3, 2));
        assert!(sample(&m, 0, 0, 1).is_err());
    }

    #[test]
    fn imbalance_support() {
        let ds = imbalance_dataset(1.0, 500, 5.0, 3, 0).unwrap();
        assert_eq!(ds.n_plus(), 1);
        assert!(ds.rows().skip(1).all(|r| r[0] <= 0.0 && r[0] >= -5.0));
    }
}
