//! Simulation studies on the two Gaussian families.
//!
//! Per dimension and replication: a training set, a tuning set of the same
//! shape and a balanced test set. SVM picks `C_svm` from the grid by tuning
//! error; DWD, DWSVM and nDWSVM use the `C_dwd` heuristic and the fixed
//! `C_svm` and `alpha`.

use std::fmt::Write as _;
use std::time::Instant;

use dwsvm_core::classifiers::{default_c_dwd, fit, FittedClassifier, Method};
use dwsvm_core::evaluation::{angle_between, misclass_rate, tune_c_svm, MetricRecord, TuningSource};
use dwsvm_core::rng::Role;
use dwsvm_core::simgen::{bayes_rule, sample_streams, GaussianClassModel};
use dwsvm_core::{Hyperparams, LabeledDataset};

use super::{cell_stream, gaussian_model, mean_se, par_map, Failure, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub records: Vec<MetricRecord>,
    pub failures: Vec<Failure>,
    pub nonconverged: usize,
}

/// Draws `n_plus + n_minus` observations for `(d, replication)` using the
/// two given stream roles.
pub fn draw(
    model: &GaussianClassModel,
    seed: u64,
    replication: u64,
    (n_plus, n_minus): (usize, usize),
    roles: (Role, Role),
) -> dwsvm_core::Result<LabeledDataset> {
    let d = model.dim() as u64;
    sample_streams(
        model,
        n_plus,
        n_minus,
        seed,
        (cell_stream(d, replication, roles.0), cell_stream(d, replication, roles.1)),
    )
}

struct CellOutcome {
    records: Vec<MetricRecord>,
    nonconverged: usize,
}

fn cell(cfg: &ExperimentConfig, model: &GaussianClassModel, replication: u64) -> AppResult<CellOutcome> {
    let shape = (cfg.n_plus, cfg.n_minus);
    let train = draw(model, cfg.seed, replication, shape, (Role::TrainPlus, Role::TrainMinus))?;
    let test_shape = (cfg.n_test_per_class, cfg.n_test_per_class);
    let test = draw(model, cfg.seed, replication, test_shape, (Role::TestPlus, Role::TestMinus))?;
    let bayes = bayes_rule(model);
    let solver = cfg.solver();

    let mut params = Hyperparams {
        c_svm: cfg.c_svm,
        c_dwd: default_c_dwd(&train)?,
        alpha: cfg.alpha,
        lambda: 0.0,
    };
    let svm_c = if cfg.methods.contains(&Method::Svm) {
        let tune = draw(model, cfg.seed, replication, shape, (Role::TunePlus, Role::TuneMinus))?;
        Some(tune_c_svm(&train, TuningSource::Holdout(&tune), &cfg.c_svm_grid, &solver)?.c_svm)
    } else {
        None
    };

    let mut out = CellOutcome {
        records: Vec::with_capacity(cfg.methods.len()),
        nonconverged: 0,
    };
    for &method in &cfg.methods {
        if method == Method::Svm {
            params.c_svm = svm_c.unwrap_or(cfg.c_svm);
        } else {
            params.c_svm = cfg.c_svm;
        }
        let start = Instant::now();
        let fitted: FittedClassifier = fit(method, &train, &params, &solver)?;
        let fit_seconds = start.elapsed().as_secs_f64();
        out.nonconverged += usize::from(!fitted.diagnostics.converged);
        out.records.push(MetricRecord {
            method,
            d: model.dim(),
            replication,
            test_error: misclass_rate(&fitted.model, &test)?,
            angle_to_bayes: angle_between(&fitted.model.direction, &bayes.direction)?,
            fit_seconds,
            hyperparams: fitted.hyperparams,
        });
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> AppResult<SimulationResult> {
    let example = match cfg.kind {
        ExperimentKind::Example1 => 1,
        ExperimentKind::Example2 => 2,
        other => return Err(AppError::Config(format!("'{other}' is not a simulation study"))),
    };
    let models = cfg
        .dims
        .iter()
        .map(|&d| gaussian_model(example, d))
        .collect::<AppResult<Vec<_>>>()?;
    let units: Vec<(usize, u64)> = (0..models.len())
        .flat_map(|m| (0..cfg.replications as u64).map(move |r| (m, r)))
        .collect();
    let outcomes = par_map(cfg.workers, &units, |&(m, r)| cell(cfg, &models[m], r))?;
    let mut result = SimulationResult {
        records: Vec::new(),
        failures: Vec::new(),
        nonconverged: 0,
    };
    for (&(m, r), outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok(o) => {
                result.records.extend(o.records);
                result.nonconverged += o.nonconverged;
            }
            Err(e) => result.failures.push(Failure {
                cell: format!("d{}_rep{r}", cfg.dims[m]),
                error: e.to_string(),
            }),
        }
    }
    Ok(result)
}

impl SimulationResult {
    /// Mean test error and mean angle of `method` at dimension `d`.
    pub fn means(&self, method: Method, d: usize) -> Option<(f64, f64)> {
        let (errors, angles): (Vec<f64>, Vec<f64>) = self
            .records
            .iter()
            .filter(|r| r.method == method && r.d == d)
            .map(|r| (r.test_error, r.angle_to_bayes))
            .unzip();
        (!errors.is_empty()).then(|| (mean_se(&errors).0, mean_se(&angles).0))
    }

    pub fn report(&self) -> Report {
        let mut metrics = format!("{}\n", MetricRecord::CSV_HEADER);
        let mut timings = String::from("method,d,replication,fit_seconds\n");
        for r in &self.records {
            let _ = writeln!(metrics, "{}", r.csv_row());
            let _ = writeln!(timings, "{},{},{},{}", r.method, r.d, r.replication, r.fit_seconds);
        }
        let mut keys: Vec<(usize, Method)> = self.records.iter().map(|r| (r.d, r.method)).collect();
        keys.sort();
        keys.dedup();
        let mut summary = String::from("method,d,n,mean_test_error,se_test_error,mean_angle,se_angle\n");
        for (d, method) in keys {
            let (errors, angles): (Vec<f64>, Vec<f64>) = self
                .records
                .iter()
                .filter(|r| r.method == method && r.d == d)
                .map(|r| (r.test_error, r.angle_to_bayes))
                .unzip();
            let (me, se) = mean_se(&errors);
            let (ma, sa) = mean_se(&angles);
            let _ = writeln!(summary, "{method},{d},{},{me},{se},{ma},{sa}", errors.len());
        }
        Report {
            files: vec![("metrics.csv", metrics), ("summary.csv", summary)],
            timings,
            failures: self.failures.clone(),
            nonconverged: self.nonconverged,
        }
    }
}
