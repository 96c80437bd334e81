//! Cross-validated error under label perturbation.
//!
//! For each `k` and random folding: flip `k` labels in each class, tune SVM's
//! `C_svm` by one cross-validation on the perturbed data, then count the
//! cross-validated misclassifications of every method against the original
//! labels. Foldings share their random streams across `k`, and the flipped
//! observations for `k` include those for smaller `k`.

use std::fmt::Write as _;
use std::time::Instant;

use dwsvm_core::classifiers::{default_c_dwd, fit, Method};
use dwsvm_core::evaluation::{kfold_cv, perturb_labels, tune_c_svm, FoldPlan, TuningSource};
use dwsvm_core::rng::Role;
use dwsvm_core::{Hyperparams, LabeledDataset};

use super::simulation::draw;
use super::{cell_stream, gaussian_model, mean_se, par_map, Failure, Report};
use crate::config::ExperimentConfig;
use crate::dataset_io::read_dataset;
use crate::error::AppResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvRow {
    pub method: Method,
    pub k: usize,
    pub folding: u64,
    pub c_svm: f64,
    /// Misclassified held-out observations summed over the folds.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub rows: Vec<CvRow>,
    pub seconds: Vec<(usize, u64, f64)>,
    pub failures: Vec<Failure>,
}

/// The simulated high-dimensional stand-in: Example 1 draws.
pub fn standin(cfg: &ExperimentConfig) -> AppResult<LabeledDataset> {
    let model = gaussian_model(1, cfg.standin_d)?;
    Ok(draw(&model, cfg.seed, 0, (cfg.standin_n_plus, cfg.standin_n_minus), (Role::TrainPlus, Role::TrainMinus))?)
}

fn folding(cfg: &ExperimentConfig, data: &LabeledDataset, k: usize, r: u64) -> AppResult<Vec<CvRow>> {
    let solver = cfg.solver();
    let labels = perturb_labels(data.labels(), k, cfg.seed, cell_stream(0, r, Role::Perturbation))?;
    let perturbed = data.with_labels(labels)?;
    let tuned = if cfg.methods.contains(&Method::Svm) {
        let inner = FoldPlan::stratified(perturbed.labels(), cfg.folds, cfg.seed, cell_stream(0, r, Role::InnerFolds))?;
        tune_c_svm(&perturbed, TuningSource::Folds(&inner), &cfg.c_svm_grid, &solver)?.c_svm
    } else {
        cfg.c_svm
    };
    let outer = FoldPlan::stratified(perturbed.labels(), cfg.folds, cfg.seed, cell_stream(0, r, Role::Folds))?;
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let c_svm = if method == Method::Svm { tuned } else { cfg.c_svm };
        let cv = kfold_cv(
            &perturbed,
            &outer,
            |train| {
                let params = Hyperparams {
                    c_svm,
                    c_dwd: default_c_dwd(train)?,
                    alpha: cfg.alpha,
                    lambda: 0.0,
                };
                Ok(fit(method, train, &params, &solver)?.model)
            },
            Some(data.labels()),
        )?;
        rows.push(CvRow {
            method,
            k,
            folding: r,
            c_svm,
            errors: cv.total(),
        });
    }
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig) -> AppResult<PerturbationResult> {
    let data = match &cfg.input {
        Some(path) => read_dataset(path)?,
        None => standin(cfg)?,
    };
    run_on(cfg, &data)
}

pub fn run_on(cfg: &ExperimentConfig, data: &LabeledDataset) -> AppResult<PerturbationResult> {
    let units: Vec<(usize, u64)> = cfg
        .k_list
        .iter()
        .flat_map(|&k| (0..cfg.replications as u64).map(move |r| (k, r)))
        .collect();
    let outcomes = par_map(cfg.workers, &units, |&(k, r)| {
        let start = Instant::now();
        folding(cfg, data, k, r).map(|rows| (rows, start.elapsed().as_secs_f64()))
    })?;
    let mut result = PerturbationResult {
        rows: Vec::new(),
        seconds: Vec::new(),
        failures: Vec::new(),
    };
    for (&(k, r), outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok((rows, secs)) => {
                result.rows.extend(rows);
                result.seconds.push((k, r, secs));
            }
            Err(e) => result.failures.push(Failure {
                cell: format!("k{k}_folding{r}"),
                error: e.to_string(),
            }),
        }
    }
    Ok(result)
}

impl PerturbationResult {
    pub fn mean_errors(&self, method: Method, k: usize) -> Option<f64> {
        let e: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.k == k)
            .map(|r| r.errors as f64)
            .collect();
        (!e.is_empty()).then(|| mean_se(&e).0)
    }

    pub fn report(&self) -> Report {
        let mut metrics = String::from("method,k,folding,c_svm,cv_errors\n");
        for r in &self.rows {
            let _ = writeln!(metrics, "{},{},{},{},{}", r.method, r.k, r.folding, r.c_svm, r.errors);
        }
        let mut keys: Vec<(Method, usize)> = self.rows.iter().map(|r| (r.method, r.k)).collect();
        keys.sort();
        keys.dedup();
        let mut summary = String::from("method,k,n,mean_cv_errors,se_cv_errors\n");
        for (method, k) in keys {
            let e: Vec<f64> = self
                .rows
                .iter()
                .filter(|r| r.method == method && r.k == k)
                .map(|r| r.errors as f64)
                .collect();
            let (m, se) = mean_se(&e);
            let _ = writeln!(summary, "{method},{k},{},{m},{se}", e.len());
        }
        let mut timings = String::from("k,folding,seconds\n");
        for (k, r, s) in &self.seconds {
            let _ = writeln!(timings, "{k},{r},{s}");
        }
        Report {
            files: vec![("cv_errors.csv", metrics), ("summary.csv", summary)],
            timings,
            failures: self.failures.clone(),
            nonconverged: 0,
        }
    }
}
