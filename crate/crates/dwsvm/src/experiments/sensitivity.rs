//! DWSVM test error over a `C_svm` grid (fixed `alpha`) or an `alpha` grid
//! (fixed `C_svm`). Every grid value sees the same training and test sets
//! within a replication.

use std::fmt::Write as _;
use std::time::Instant;

use dwsvm_core::classifiers::{default_c_dwd, fit_dwsvm};
use dwsvm_core::evaluation::misclass_rate;
use dwsvm_core::rng::Role;
use dwsvm_core::Hyperparams;

use super::simulation::draw;
use super::{gaussian_model, mean_se, par_map, Failure, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub replication: u64,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `c_svm` or `alpha`.
    pub parameter: &'static str,
    pub grid: Vec<f64>,
    pub d: usize,
    pub rows: Vec<SweepRow>,
    pub seconds: Vec<(u64, f64)>,
    pub failures: Vec<Failure>,
    pub nonconverged: usize,
}

pub fn run(cfg: &ExperimentConfig) -> AppResult<SweepResult> {
    let (parameter, grid) = match cfg.kind {
        ExperimentKind::SensitivityC => ("c_svm", cfg.c_svm_grid.clone()),
        ExperimentKind::SensitivityAlpha => ("alpha", cfg.alpha_grid.clone()),
        other => return Err(AppError::Config(format!("'{other}' is not a sensitivity sweep"))),
    };
    let d = cfg.dims[0];
    let model = gaussian_model(cfg.example, d)?;
    let solver = cfg.solver();
    let reps: Vec<u64> = (0..cfg.replications as u64).collect();
    let outcomes = par_map(cfg.workers, &reps, |&r| -> AppResult<(Vec<SweepRow>, usize, f64)> {
        let start = Instant::now();
        let train = draw(&model, cfg.seed, r, (cfg.n_plus, cfg.n_minus), (Role::TrainPlus, Role::TrainMinus))?;
        let n_test = (cfg.n_test_per_class, cfg.n_test_per_class);
        let test = draw(&model, cfg.seed, r, n_test, (Role::TestPlus, Role::TestMinus))?;
        let c_dwd = default_c_dwd(&train)?;
        let mut rows = Vec::with_capacity(grid.len());
        let mut nonconverged = 0;
        for &value in &grid {
            let params = match cfg.kind {
                ExperimentKind::SensitivityC => Hyperparams {
                    c_svm: value,
                    c_dwd,
                    alpha: cfg.alpha,
                    lambda: 0.0,
                },
                _ => Hyperparams {
                    c_svm: cfg.c_svm,
                    c_dwd,
                    alpha: value,
                    lambda: 0.0,
                },
            };
            let fitted = fit_dwsvm(&train, &params, &solver)?;
            nonconverged += usize::from(!fitted.diagnostics.converged);
            rows.push(SweepRow {
                value,
                replication: r,
                test_error: misclass_rate(&fitted.model, &test)?,
            });
        }
        Ok((rows, nonconverged, start.elapsed().as_secs_f64()))
    })?;
    let mut result = SweepResult {
        parameter,
        grid,
        d,
        rows: Vec::new(),
        seconds: Vec::new(),
        failures: Vec::new(),
        nonconverged: 0,
    };
    for (r, outcome) in reps.into_iter().zip(outcomes) {
        match outcome {
            Ok((rows, nc, secs)) => {
                result.rows.extend(rows);
                result.nonconverged += nc;
                result.seconds.push((r, secs));
            }
            Err(e) => result.failures.push(Failure {
                cell: format!("rep{r}"),
                error: e.to_string(),
            }),
        }
    }
    Ok(result)
}

impl SweepResult {
    /// `(grid value, mean test error)` in grid order.
    pub fn mean_errors(&self) -> Vec<(f64, f64)> {
        self.grid
            .iter()
            .map(|&v| {
                let errors: Vec<f64> = self.rows.iter().filter(|r| r.value == v).map(|r| r.test_error).collect();
                (v, mean_se(&errors).0)
            })
            .collect()
    }

    pub fn report(&self) -> Report {
        let p = self.parameter;
        let mut metrics = format!("method,d,{p},replication,test_error\n");
        for r in &self.rows {
            let _ = writeln!(metrics, "DWSVM,{},{},{},{}", self.d, r.value, r.replication, r.test_error);
        }
        let mut summary = format!("method,d,{p},n,mean_test_error,se_test_error\n");
        for &v in &self.grid {
            let errors: Vec<f64> = self.rows.iter().filter(|r| r.value == v).map(|r| r.test_error).collect();
            let (m, se) = mean_se(&errors);
            let _ = writeln!(summary, "DWSVM,{},{v},{},{m},{se}", self.d, errors.len());
        }
        let mut timings = String::from("replication,seconds\n");
        for (r, s) in &self.seconds {
            let _ = writeln!(timings, "{r},{s}");
        }
        Report {
            files: vec![("metrics.csv", metrics), ("summary.csv", summary)],
            timings,
            failures: self.failures.clone(),
            nonconverged: self.nonconverged,
        }
    }
}
