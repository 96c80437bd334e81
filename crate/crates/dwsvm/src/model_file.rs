//! Versioned plain-text model files.
//!
//! ```text
//! dwsvm-model 1
//! method DWSVM
//! c_svm 100
//! c_dwd 0.165
//! alpha 0.5
//! dim 3
//! direction 0.6 0 0.8
//! intercept -0.25
//! axillary_intercept 1.5        (or "none")
//! objective 12.5
//! converged true
//! iterations 420
//! max_margin false
//! ```
//!
//! Numbers use the shortest representation that reads back to the same value.

use std::fs;
use std::path::Path;

use dwsvm_core::classifiers::{FitDiagnostics, FittedClassifier, Method};
use dwsvm_core::{Hyperparams, LinearModel};

use crate::error::{AppError, AppResult};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "dwsvm-model";
/// Accepted deviation of the stored direction's norm from one.
const NORM_TOL: f64 = 1e-9;

pub fn format_model(fit: &FittedClassifier) -> String {
    let m = &fit.model;
    let h = &fit.hyperparams;
    let d = &fit.diagnostics;
    let direction: Vec<String> = m.direction.iter().map(f64::to_string).collect();
    let axillary = m.axillary_intercept.map_or_else(|| "none".to_string(), |b| b.to_string());
    format!(
        "{MAGIC} {FORMAT_VERSION}\nmethod {}\nc_svm {}\nc_dwd {}\nalpha {}\ndim {}\ndirection {}\nintercept {}\naxillary_intercept {axillary}\nobjective {}\nconverged {}\niterations {}\nmax_margin {}\n",
        fit.method,
        h.c_svm,
        h.c_dwd,
        h.alpha,
        m.dim(),
        direction.join(" "),
        m.intercept,
        d.objective,
        d.converged,
        d.iterations,
        d.max_margin
    )
}

fn bad(msg: impl std::fmt::Display) -> AppError {
    AppError::Data(format!("invalid model file: {msg}"))
}

fn num<T: std::str::FromStr>(key: &str, text: &str) -> AppResult<T> {
    text.parse().map_err(|_| bad(format!("{key}: cannot parse '{text}'")))
}

pub fn parse_model(text: &str) -> AppResult<FittedClassifier> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let magic = lines.next().ok_or_else(|| bad("empty file"))?;
    match magic.split_once(' ') {
        Some((MAGIC, v)) if v.trim() == FORMAT_VERSION.to_string() => {}
        Some((MAGIC, v)) => return Err(bad(format!("unsupported version {v}"))),
        _ => return Err(bad("missing header")),
    }
    let mut fields = std::collections::BTreeMap::new();
    for line in lines {
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        if fields.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(bad(format!("duplicate key {key}")));
        }
    }
    let get = |key: &str| fields.get(key).map(String::as_str).ok_or_else(|| bad(format!("missing {key}")));
    let method: Method = get("method")?.parse().map_err(|_| bad("unknown method"))?;
    let dim: usize = num("dim", get("dim")?)?;
    let direction = get("direction")?
        .split_whitespace()
        .map(|t| num::<f64>("direction", t))
        .collect::<AppResult<Vec<_>>>()?;
    if direction.len() != dim {
        return Err(bad(format!("direction has {} entries, dim is {dim}", direction.len())));
    }
    let norm = direction.iter().map(|w| w * w).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(bad(format!("direction norm {norm} is not 1")));
    }
    let axillary = match get("axillary_intercept")? {
        "none" => None,
        t => Some(num("axillary_intercept", t)?),
    };
    if (method == Method::Dwsvm) != axillary.is_some() {
        return Err(bad("axillary intercept must be present exactly for DWSVM"));
    }
    Ok(FittedClassifier {
        method,
        model: LinearModel::new(direction, num("intercept", get("intercept")?)?, axillary),
        hyperparams: Hyperparams {
            c_svm: num("c_svm", get("c_svm")?)?,
            c_dwd: num("c_dwd", get("c_dwd")?)?,
            alpha: num("alpha", get("alpha")?)?,
            lambda: 0.0,
        },
        diagnostics: FitDiagnostics {
            objective: num("objective", get("objective")?)?,
            converged: num("converged", get("converged")?)?,
            iterations: num("iterations", get("iterations")?)?,
            max_margin: num("max_margin", get("max_margin")?)?,
        },
    })
}

pub fn save_model(path: &Path, fit: &FittedClassifier) -> AppResult<()> {
    fs::write(path, format_model(fit)).map_err(|e| AppError::io(path, e))
}

pub fn load_model(path: &Path) -> AppResult<FittedClassifier> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_model(&text)
}
