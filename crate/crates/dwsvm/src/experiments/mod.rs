//! Experiment runners.
//!
//! Each experiment is split into independent cells (for example one
//! dimension and replication) that run on a bounded worker pool. Results are
//! collected in cell order, so the metric files do not depend on the number
//! of workers or on scheduling. Wall-clock times go to `timings.csv` only.
//!
//! Every random draw comes from the ChaCha20 stream
//! `(cell << 32) | (replication * 16 + role)` of the configured seed.

pub mod fisher;
pub mod imbalance;
pub mod perturbation;
pub mod sensitivity;
pub mod simulation;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dwsvm_core::rng::{stream_id, Role};
use dwsvm_core::simgen::{make_example1, make_example2, GaussianClassModel};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};

/// A cell that did not produce results.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub cell: String,
    pub error: String,
}

/// Everything an experiment writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Reproducible result files: name and contents.
    pub files: Vec<(&'static str, String)>,
    /// Contents of `timings.csv`.
    pub timings: String,
    pub failures: Vec<Failure>,
    /// Fits whose solver stopped on its iteration budget.
    pub nonconverged: usize,
}

pub fn run(cfg: &ExperimentConfig) -> AppResult<Report> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ExperimentKind::Example1 | ExperimentKind::Example2 => simulation::run(cfg)?.report(),
        ExperimentKind::SensitivityC | ExperimentKind::SensitivityAlpha => sensitivity::run(cfg)?.report(),
        ExperimentKind::Imbalance => imbalance::run(cfg)?.report(),
        ExperimentKind::Perturb => perturbation::run(cfg)?.report(),
        ExperimentKind::Fisher => fisher::run(cfg)?.report(),
    })
}

/// Writes the report files, `timings.csv` and `manifest.txt` into `dir`.
pub fn write_report(dir: &Path, cfg: &ExperimentConfig, report: &Report) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    for (name, contents) in &report.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| AppError::io(&path, e))?;
    }
    let path = dir.join("timings.csv");
    fs::write(&path, &report.timings).map_err(|e| AppError::io(&path, e))?;
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest(cfg, report)).map_err(|e| AppError::io(&path, e))
}

/// Config echo, seeds, software version and completion status.
pub fn manifest(cfg: &ExperimentConfig, report: &Report) -> String {
    let mut m = String::new();
    let status = if report.failures.is_empty() { "complete" } else { "incomplete" };
    let _ = writeln!(m, "dwsvm-manifest 1");
    let _ = writeln!(m, "software = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "kind = {}", cfg.kind);
    let _ = writeln!(m, "status = {status}");
    let _ = writeln!(m, "rng = ChaCha20 (rand_chacha 0.9), seed_from_u64(seed), stream (cell << 32) | (replication * 16 + role)");
    let _ = writeln!(m, "c_dwd_rule = 100 / (median between-class distance)^2");
    for (k, v) in cfg.effective() {
        let _ = writeln!(m, "config.{k} = {v}");
    }
    for (k, v) in &cfg.explicit {
        let _ = writeln!(m, "explicit.{k} = {v}");
    }
    let names: Vec<&str> = report.files.iter().map(|(n, _)| *n).collect();
    let _ = writeln!(m, "files = {}, timings.csv (wall-clock, not reproducible)", names.join(", "));
    let _ = writeln!(m, "nonconverged_fits = {}", report.nonconverged);
    for f in &report.failures {
        let _ = writeln!(m, "incomplete.{} = {}", f.cell, f.error);
    }
    m
}

pub(crate) fn cell_stream(cell: u64, replication: u64, role: Role) -> u64 {
    (cell << 32) | stream_id(replication, role)
}

/// Maps `f` over `units` on `workers` threads (0 = all cores), keeping order.
pub(crate) fn par_map<U, T, F>(workers: usize, units: &[U], f: F) -> AppResult<Vec<T>>
where
    U: Sync,
    T: Send,
    F: Fn(&U) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| units.par_iter().map(&f).collect()))
}

pub(crate) fn gaussian_model(example: u8, d: usize) -> AppResult<GaussianClassModel> {
    match example {
        1 => make_example1(d),
        2 => make_example2(d),
        _ => return Err(AppError::Config(format!("unknown example {example}"))),
    }
    .map_err(|e| AppError::Config(e.to_string()))
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`; zero for one value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[3.0]), (3.0, 0.0));
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn streams_do_not_collide() {
        assert_ne!(cell_stream(1, 0, Role::TrainPlus), cell_stream(0, 0, Role::TrainPlus));
        assert_ne!(cell_stream(300, 5, Role::TestMinus), cell_stream(300, 5, Role::TestPlus));
    }

    #[test]
    fn par_map_keeps_order() {
        let out = par_map(3, &[5, 1, 4, 2], |&x| x * 10).unwrap();
        assert_eq!(out, vec![50, 10, 40, 20]);
    }
}
