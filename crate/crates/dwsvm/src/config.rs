//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated; numbers may be written as powers such as `2^-5`.
//! Keys that are unknown, repeated, or not used by the experiment kind are
//! errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dwsvm_core::classifiers::Method;
use dwsvm_core::evaluation::c_svm_grid;
use dwsvm_core::solver::SolverConfig;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    Example1,
    Example2,
    SensitivityC,
    SensitivityAlpha,
    Imbalance,
    Perturb,
    Fisher,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Example1,
        ExperimentKind::Example2,
        ExperimentKind::SensitivityC,
        ExperimentKind::SensitivityAlpha,
        ExperimentKind::Imbalance,
        ExperimentKind::Perturb,
        ExperimentKind::Fisher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Example1 => "example1",
            ExperimentKind::Example2 => "example2",
            ExperimentKind::SensitivityC => "sensitivity_c",
            ExperimentKind::SensitivityAlpha => "sensitivity_alpha",
            ExperimentKind::Imbalance => "imbalance",
            ExperimentKind::Perturb => "perturb",
            ExperimentKind::Fisher => "fisher",
        }
    }

    /// Keys accepted in addition to `seed`, `workers`, `tol` and `max_iters`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Example1 | ExperimentKind::Example2 => {
                &["replications", "dims", "methods", "n_plus", "n_minus", "n_test_per_class", "c_svm", "alpha", "c_svm_grid"]
            }
            ExperimentKind::SensitivityC => &["replications", "example", "d", "n_plus", "n_minus", "n_test_per_class", "alpha", "c_svm_grid"],
            ExperimentKind::SensitivityAlpha => {
                &["replications", "example", "d", "n_plus", "n_minus", "n_test_per_class", "c_svm", "alpha_grid"]
            }
            ExperimentKind::Imbalance => &["replications", "methods", "x0", "m", "n_minus_list", "c_svm", "alpha"],
            ExperimentKind::Perturb => &[
                "replications",
                "methods",
                "input",
                "folds",
                "k_list",
                "c_svm",
                "alpha",
                "c_svm_grid",
                "standin_d",
                "standin_n_plus",
                "standin_n_minus",
            ],
            ExperimentKind::Fisher => &["q_grid", "alpha_grid", "c_grid"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| AppError::Config(format!("unknown experiment kind '{s}'")))
    }
}

const COMMON_KEYS: [&str; 4] = ["seed", "workers", "tol", "max_iters"];

/// Effective settings of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Replications (simulations, sweeps, imbalance) or random foldings (perturb).
    pub replications: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub dims: Vec<usize>,
    pub methods: Vec<Method>,
    /// Simulation family for the sensitivity sweeps (1 or 2).
    pub example: u8,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_test_per_class: usize,
    /// `C_svm` for DWSVM and nDWSVM (and SVM in the imbalance sweep).
    pub c_svm: f64,
    pub alpha: f64,
    pub c_svm_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub x0: f64,
    pub m: f64,
    pub n_minus_list: Vec<usize>,
    pub input: Option<PathBuf>,
    pub folds: usize,
    pub k_list: Vec<usize>,
    pub standin_d: usize,
    pub standin_n_plus: usize,
    pub standin_n_minus: usize,
    pub q_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Keys set explicitly, in file order, for the manifest.
    pub explicit: Vec<(String, String)>,
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let solver = SolverConfig::experiment();
        let (dims, d_alpha_grid, c_svm, methods) = match kind {
            ExperimentKind::Example1 | ExperimentKind::Example2 => (vec![100, 200, 300, 500, 1000], vec![], 100.0, Method::ALL.to_vec()),
            ExperimentKind::SensitivityC | ExperimentKind::SensitivityAlpha => {
                (vec![300], (1..=19).map(|i| f64::from(i) * 0.05).collect(), 100.0, vec![Method::Dwsvm])
            }
            ExperimentKind::Imbalance => (vec![1], vec![], 1.0 / 16.0, vec![Method::Svm, Method::Dwsvm, Method::Dwd]),
            ExperimentKind::Perturb => (vec![], vec![], 100.0, Method::ALL.to_vec()),
            ExperimentKind::Fisher => (vec![], vec![0.1, 0.5, 0.9], 100.0, vec![]),
        };
        Self {
            kind,
            seed: 20_240_601,
            replications: 100,
            workers: 0,
            tol: solver.tol,
            max_iters: solver.max_iters,
            dims,
            methods,
            example: 1,
            n_plus: 200,
            n_minus: 50,
            n_test_per_class: 2000,
            c_svm,
            alpha: 0.5,
            c_svm_grid: c_svm_grid(),
            alpha_grid: d_alpha_grid,
            x0: 1.0,
            m: 5.0,
            n_minus_list: vec![10, 100, 1000, 10_000],
            input: None,
            folds: 3,
            k_list: vec![0, 1, 2],
            standin_d: 1000,
            standin_n_plus: 27,
            standin_n_minus: 11,
            q_grid: vec![0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9],
            c_grid: vec![1.0, 100.0],
            explicit: Vec::new(),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iters: self.max_iters,
            ..SolverConfig::experiment()
        }
    }

    /// Parses a config file's text on top of the defaults for `kind`.
    pub fn parse(kind: ExperimentKind, text: &str) -> AppResult<Self> {
        let mut cfg = Self::defaults(kind);
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AppError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), n + 1).is_some() {
                return Err(AppError::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
            cfg.set(key, value).map_err(|e| match e {
                AppError::Config(m) => AppError::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key, rejecting keys the kind does not use.
    pub fn set(&mut self, key: &str, value: &str) -> AppResult<()> {
        if !COMMON_KEYS.contains(&key) && !self.kind.keys().contains(&key) {
            let known = ExperimentKind::ALL.iter().any(|k| k.keys().contains(&key));
            return Err(AppError::Config(if known {
                format!("key '{key}' is not used by experiment '{}'", self.kind)
            } else {
                format!("unknown key '{key}'")
            }));
        }
        match key {
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "tol" => self.tol = number(key, value)?,
            "max_iters" => self.max_iters = parse(key, value)?,
            "replications" => self.replications = parse(key, value)?,
            "dims" => self.dims = list(key, value, parse)?,
            "d" => self.dims = vec![parse(key, value)?],
            "methods" => self.methods = list(key, value, |k, v| v.parse::<Method>().map_err(|e| AppError::Config(format!("{k}: {e}"))))?,
            "example" => self.example = parse(key, value)?,
            "n_plus" => self.n_plus = parse(key, value)?,
            "n_minus" => self.n_minus = parse(key, value)?,
            "n_test_per_class" => self.n_test_per_class = parse(key, value)?,
            "c_svm" => self.c_svm = number(key, value)?,
            "alpha" => self.alpha = number(key, value)?,
            "c_svm_grid" => self.c_svm_grid = list(key, value, number)?,
            "alpha_grid" => self.alpha_grid = list(key, value, number)?,
            "x0" => self.x0 = number(key, value)?,
            "m" => self.m = number(key, value)?,
            "n_minus_list" => self.n_minus_list = list(key, value, parse)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "folds" => self.folds = parse(key, value)?,
            "k_list" => self.k_list = list(key, value, parse)?,
            "standin_d" => self.standin_d = parse(key, value)?,
            "standin_n_plus" => self.standin_n_plus = parse(key, value)?,
            "standin_n_minus" => self.standin_n_minus = parse(key, value)?,
            "q_grid" => self.q_grid = list(key, value, number)?,
            "c_grid" => self.c_grid = list(key, value, number)?,
            _ => unreachable!("key lists and setters disagree on '{key}'"),
        }
        self.explicit.retain(|(k, _)| k != key);
        self.explicit.push((key.to_string(), value.to_string()));
        Ok(())
    }

    pub fn validate(&self) -> AppResult<()> {
        let err = |m: &str| Err(AppError::Config(m.to_string()));
        if self.replications == 0 {
            return err("replications must be at least 1");
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return err("tol must be positive and max_iters at least 1");
        }
        let positive = |v: &[f64]| v.iter().all(|&c| c > 0.0 && c.is_finite());
        if !(self.c_svm > 0.0 && self.c_svm.is_finite()) || !positive(&self.c_svm_grid) || self.c_svm_grid.is_empty() {
            return err("c_svm values must be positive");
        }
        let alpha_ok = |a: f64| (0.0..1.0).contains(&a);
        if !alpha_ok(self.alpha) {
            return err("alpha must lie in [0, 1)");
        }
        match self.kind {
            ExperimentKind::Example1 | ExperimentKind::Example2 | ExperimentKind::SensitivityC | ExperimentKind::SensitivityAlpha => {
                if self.dims.is_empty() || self.dims.contains(&0) {
                    return err("dimensions must be positive");
                }
                let example2 = self.kind == ExperimentKind::Example2
                    || (matches!(self.kind, ExperimentKind::SensitivityC | ExperimentKind::SensitivityAlpha) && self.example == 2);
                if example2 && self.dims.iter().any(|d| d % 50 != 0) {
                    return err("example 2 needs dimensions divisible by 50");
                }
                if !(1..=2).contains(&self.example) {
                    return err("example must be 1 or 2");
                }
                if self.n_plus == 0 || self.n_minus == 0 || self.n_test_per_class == 0 {
                    return err("class sizes must be at least 1");
                }
                if self.kind == ExperimentKind::SensitivityAlpha && (self.alpha_grid.is_empty() || !self.alpha_grid.iter().all(|&a| alpha_ok(a))) {
                    return err("alpha_grid values must lie in [0, 1)");
                }
            }
            ExperimentKind::Imbalance => {
                if self.n_minus_list.is_empty() || self.n_minus_list.contains(&0) || !(self.m > 0.0) || !self.x0.is_finite() {
                    return err("imbalance needs n_minus_list >= 1, m > 0 and finite x0");
                }
                if self.methods.contains(&Method::Ndwsvm) {
                    return err("imbalance supports SVM, DWSVM and DWD");
                }
            }
            ExperimentKind::Perturb => {
                if self.folds < 2 || self.k_list.is_empty() {
                    return err("perturb needs folds >= 2 and a nonempty k_list");
                }
                if self.input.is_none() && (self.standin_d == 0 || self.standin_n_plus == 0 || self.standin_n_minus == 0) {
                    return err("stand-in sizes must be at least 1");
                }
            }
            ExperimentKind::Fisher => {
                if self.q_grid.iter().any(|&q| !(q > 0.0 && q < 1.0) || q == 0.5) || self.q_grid.is_empty() {
                    return err("q_grid values must lie in (0, 1) and differ from 0.5");
                }
                if self.alpha_grid.is_empty() || !self.alpha_grid.iter().all(|&a| alpha_ok(a)) {
                    return err("alpha_grid values must lie in [0, 1)");
                }
                if self.c_grid.is_empty() || !positive(&self.c_grid) {
                    return err("c_grid values must be positive");
                }
            }
        }
        if matches!(self.kind, ExperimentKind::Example1 | ExperimentKind::Example2 | ExperimentKind::Imbalance | ExperimentKind::Perturb)
            && self.methods.is_empty()
        {
            return err("methods must not be empty");
        }
        Ok(())
    }

    /// Every effective setting relevant to the kind, as `key = value` pairs.
    pub fn effective(&self) -> Vec<(String, String)> {
        let join_f = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let join_u = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = Vec::new();
        for &key in COMMON_KEYS.iter().chain(self.kind.keys()) {
            let value = match key {
                "seed" => self.seed.to_string(),
                "workers" => continue,
                "tol" => self.tol.to_string(),
                "max_iters" => self.max_iters.to_string(),
                "replications" => self.replications.to_string(),
                "dims" => join_u(&self.dims),
                "d" => join_u(&self.dims),
                "methods" => self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
                "example" => self.example.to_string(),
                "n_plus" => self.n_plus.to_string(),
                "n_minus" => self.n_minus.to_string(),
                "n_test_per_class" => self.n_test_per_class.to_string(),
                "c_svm" => self.c_svm.to_string(),
                "alpha" => self.alpha.to_string(),
                "c_svm_grid" => join_f(&self.c_svm_grid),
                "alpha_grid" => join_f(&self.alpha_grid),
                "x0" => self.x0.to_string(),
                "m" => self.m.to_string(),
                "n_minus_list" => join_u(&self.n_minus_list),
                "input" => self.input.as_ref().map_or_else(|| "(stand-in)".to_string(), |p| p.display().to_string()),
                "folds" => self.folds.to_string(),
                "k_list" => join_u(&self.k_list),
                "standin_d" => self.standin_d.to_string(),
                "standin_n_plus" => self.standin_n_plus.to_string(),
                "standin_n_minus" => self.standin_n_minus.to_string(),
                "q_grid" => join_f(&self.q_grid),
                "c_grid" => join_f(&self.c_grid),
                _ => continue,
            };
            out.push((key.to_string(), value));
        }
        out
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> AppResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| AppError::Config(format!("{key}: cannot parse '{value}'")))
}

/// A decimal number or a power `a^b`.
pub fn number(key: &str, value: &str) -> AppResult<f64> {
    let v = value.trim();
    let out = match v.split_once('^') {
        Some((base, exp)) => parse::<f64>(key, base)?.powf(parse::<f64>(key, exp)?),
        None => parse::<f64>(key, v)?,
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(AppError::Config(format!("{key}: '{value}' is not finite")))
    }
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str, &str) -> AppResult<T>) -> AppResult<Vec<T>> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| item(key, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = ExperimentConfig::parse(
            ExperimentKind::Example1,
            "# demo\nseed = 7\nreplications = 20\ndims = 100, 300\nc_svm_grid = 2^-1, 2^3\nmethods = svm,DWSVM\n",
        )
        .unwrap();
        assert_eq!((cfg.seed, cfg.replications, cfg.dims.clone()), (7, 20, vec![100, 300]));
        assert_eq!(cfg.c_svm_grid, vec![0.5, 8.0]);
        assert_eq!(cfg.methods, vec![Method::Svm, Method::Dwsvm]);
        for bad in ["colour = red", "seed = 1\nseed = 2", "q_grid = 0.2", "replications = 0", "dims", "alpha = 1"] {
            assert!(matches!(ExperimentConfig::parse(ExperimentKind::Example1, bad), Err(AppError::Config(_))), "{bad}");
        }
        assert!(ExperimentConfig::parse(ExperimentKind::Example2, "dims = 120").is_err());
        assert!(ExperimentConfig::parse(ExperimentKind::Fisher, "q_grid = 0.5").is_err());
    }

    #[test]
    fn defaults_follow_the_protocols() {
        let e = ExperimentConfig::defaults(ExperimentKind::Example1);
        assert_eq!((e.n_plus, e.n_minus, e.n_test_per_class, e.replications), (200, 50, 2000, 100));
        assert_eq!(e.c_svm_grid.len(), 18);
        let a = ExperimentConfig::defaults(ExperimentKind::SensitivityAlpha);
        assert_eq!(a.alpha_grid.len(), 19);
        assert!((a.alpha_grid[18] - 0.95).abs() < 1e-12);
        assert!("perturb".parse::<ExperimentKind>().is_ok());
    }
}
