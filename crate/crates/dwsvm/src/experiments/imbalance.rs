//! Intercepts under extreme imbalance in one dimension: a single positive
//! at `x0` and `n_minus` negatives uniform on `[-m, 0]`.

use std::fmt::Write as _;
use std::time::Instant;

use dwsvm_core::classifiers::{default_c_dwd, fit, Method};
use dwsvm_core::rng::Role;
use dwsvm_core::simgen::imbalance_dataset;
use dwsvm_core::Hyperparams;

use super::{cell_stream, mean_se, median, par_map, Failure, Report};
use crate::config::ExperimentConfig;
use crate::error::AppResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterceptRow {
    pub method: Method,
    pub n_minus: usize,
    pub replication: u64,
    /// Main intercept (direction normalized to unit length).
    pub beta: f64,
    /// Sign of the fitted one-dimensional direction.
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceResult {
    pub rows: Vec<InterceptRow>,
    pub c_svm: f64,
    pub x0: f64,
    pub m: f64,
    pub seconds: Vec<(usize, u64, f64)>,
    pub failures: Vec<Failure>,
    pub nonconverged: usize,
}

pub fn run(cfg: &ExperimentConfig) -> AppResult<ImbalanceResult> {
    let units: Vec<(usize, u64)> = cfg
        .n_minus_list
        .iter()
        .flat_map(|&n| (0..cfg.replications as u64).map(move |r| (n, r)))
        .collect();
    let solver = cfg.solver();
    let outcomes = par_map(cfg.workers, &units, |&(n_minus, r)| -> AppResult<(Vec<InterceptRow>, usize, f64)> {
        let start = Instant::now();
        let data = imbalance_dataset(cfg.x0, n_minus, cfg.m, cfg.seed, cell_stream(n_minus as u64, r, Role::TrainMinus))?;
        let params = Hyperparams {
            c_svm: cfg.c_svm,
            c_dwd: default_c_dwd(&data)?,
            alpha: cfg.alpha,
            lambda: 0.0,
        };
        let mut rows = Vec::new();
        let mut nonconverged = 0;
        for &method in &cfg.methods {
            let fitted = fit(method, &data, &params, &solver)?;
            nonconverged += usize::from(!fitted.diagnostics.converged);
            rows.push(InterceptRow {
                method,
                n_minus,
                replication: r,
                beta: fitted.model.intercept,
                direction: fitted.model.direction[0],
            });
        }
        Ok((rows, nonconverged, start.elapsed().as_secs_f64()))
    })?;
    let mut result = ImbalanceResult {
        rows: Vec::new(),
        c_svm: cfg.c_svm,
        x0: cfg.x0,
        m: cfg.m,
        seconds: Vec::new(),
        failures: Vec::new(),
        nonconverged: 0,
    };
    for (&(n, r), outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok((rows, nc, secs)) => {
                result.rows.extend(rows);
                result.nonconverged += nc;
                result.seconds.push((n, r, secs));
            }
            Err(e) => result.failures.push(Failure {
                cell: format!("n{n}_rep{r}"),
                error: e.to_string(),
            }),
        }
    }
    Ok(result)
}

impl ImbalanceResult {
    pub fn betas(&self, method: Method, n_minus: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.n_minus == n_minus)
            .map(|r| r.beta)
            .collect()
    }

    pub fn report(&self) -> Report {
        let mut metrics = String::from("method,n_minus,replication,beta,direction\n");
        for r in &self.rows {
            let _ = writeln!(metrics, "{},{},{},{},{}", r.method, r.n_minus, r.replication, r.beta, r.direction);
        }
        let mut keys: Vec<(Method, usize)> = self.rows.iter().map(|r| (r.method, r.n_minus)).collect();
        keys.sort();
        keys.dedup();
        let mut summary = String::from("method,n_minus,n,mean_beta,se_beta,min_beta,median_beta,max_beta\n");
        for (method, n) in keys {
            let b = self.betas(method, n);
            let (mean, se) = mean_se(&b);
            let min = b.iter().copied().fold(f64::INFINITY, f64::min);
            let max = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(summary, "{method},{n},{},{mean},{se},{min},{},{max}", b.len(), median(&b));
        }
        let mut timings = String::from("n_minus,replication,seconds\n");
        for (n, r, s) in &self.seconds {
            let _ = writeln!(timings, "{n},{r},{s}");
        }
        Report {
            files: vec![("intercepts.csv", metrics), ("summary.csv", summary)],
            timings,
            failures: self.failures.clone(),
            nonconverged: self.nonconverged,
        }
    }
}
