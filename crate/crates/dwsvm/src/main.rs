use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dwsvm::config::{ExperimentConfig, ExperimentKind};
use dwsvm::dataset_io::{read_dataset, read_features, write_dataset};
use dwsvm::error::{AppError, AppResult};
use dwsvm::experiments;
use dwsvm::model_file::{load_model, save_model};
use dwsvm::{simulate, SimSpec};
use dwsvm_core::classifiers::{default_c_dwd, fit, Method};
use dwsvm_core::evaluation::export_projections;
use dwsvm_core::solver::SolverConfig;
use dwsvm_core::{Hyperparams, Label};

#[derive(Parser)]
#[command(name = "dwsvm", version, about = "Linear SVM, DWD, DWSVM and nDWSVM classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a classifier to a labeled CSV and save the model.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "dwsvm")]
        method: Method,
        #[arg(long, default_value_t = 100.0)]
        c_svm: f64,
        /// Defaults to 100 over the squared median between-class distance.
        #[arg(long)]
        c_dwd: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50_000)]
        max_iters: usize,
        #[arg(long)]
        model: PathBuf,
        /// Also write per-observation projections and margins.
        #[arg(long)]
        projections: Option<PathBuf>,
    },
    /// Predict labels for the rows of a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw training and test sets from a Gaussian example.
    Simulate {
        #[arg(long, default_value_t = 1)]
        example: u8,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        n_plus: usize,
        #[arg(long, default_value_t = 50)]
        n_minus: usize,
        #[arg(long, default_value_t = 2000)]
        n_test_per_class: usize,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        /// Directory receiving train.csv and test.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write its results.
    Experiment {
        kind: ExperimentKind,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to results/<kind>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dwsvm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> AppResult<()> {
    match command {
        Command::Fit {
            data,
            method,
            c_svm,
            c_dwd,
            alpha,
            tol,
            max_iters,
            model,
            projections,
        } => {
            let train = read_dataset(&data)?;
            let params = Hyperparams {
                c_svm,
                c_dwd: match c_dwd {
                    Some(c) => c,
                    None => default_c_dwd(&train)?,
                },
                alpha,
                lambda: 0.0,
            };
            let solver = SolverConfig {
                tol,
                max_iters,
                ..SolverConfig::default()
            };
            params.validate().map_err(|e| AppError::Config(e.to_string()))?;
            solver.validate().map_err(|e| AppError::Config(e.to_string()))?;
            let fitted = fit(method, &train, &params, &solver)?;
            save_model(&model, &fitted)?;
            if let Some(path) = projections {
                write_projections(&path, &fitted.model, &train)?;
            }
            if !fitted.diagnostics.converged {
                eprintln!("dwsvm: warning: solver stopped after {} iterations without converging", fitted.diagnostics.iterations);
            }
            Ok(())
        }
        Command::Predict { model, data, out } => {
            let fitted = load_model(&model)?;
            let (features, dim) = read_features(&data)?;
            if dim != fitted.model.dim() {
                return Err(AppError::Data(format!(
                    "{} has {dim} features but the model expects {}",
                    data.display(),
                    fitted.model.dim()
                )));
            }
            let mut text = String::from("y\n");
            for row in features.chunks(dim) {
                let label: Label = fitted.predict(row)?;
                let _ = writeln!(text, "{label}");
            }
            fs::write(&out, text).map_err(|e| AppError::io(&out, e))
        }
        Command::Simulate {
            example,
            d,
            n_plus,
            n_minus,
            n_test_per_class,
            seed,
            out,
        } => {
            let (train, test) = simulate(&SimSpec {
                example,
                d,
                n_plus,
                n_minus,
                n_test_per_class,
                seed,
            })?;
            fs::create_dir_all(&out).map_err(|e| AppError::io(&out, e))?;
            write_dataset(&out.join("train.csv"), &train)?;
            write_dataset(&out.join("test.csv"), &test)
        }
        Command::Experiment {
            kind,
            config,
            out,
            seed,
            workers,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
                    ExperimentConfig::parse(kind, &text)?
                }
                None => ExperimentConfig::defaults(kind),
            };
            if let Some(seed) = seed {
                cfg.set("seed", &seed.to_string())?;
            }
            if let Some(workers) = workers {
                cfg.set("workers", &workers.to_string())?;
            }
            let dir = out.unwrap_or_else(|| Path::new("results").join(kind.name()));
            let report = experiments::run(&cfg)?;
            experiments::write_report(&dir, &cfg, &report)?;
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(AppError::Numerical(format!(
                    "{} cells failed; partial results and the manifest are in {}",
                    report.failures.len(),
                    dir.display()
                )))
            }
        }
    }
}

fn write_projections(path: &Path, model: &dwsvm_core::LinearModel, data: &dwsvm_core::LabeledDataset) -> AppResult<()> {
    let mut text = String::from("projection,y,margin,axillary_margin\n");
    for row in export_projections(model, data)? {
        let axillary = row.axillary_margin.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(text, "{},{},{},{axillary}", row.projection, row.label, row.margin);
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}
