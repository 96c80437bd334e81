//! The four classifiers and the `C_dwd` scale heuristic.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::data::{norm, Hyperparams, Label, LabeledDataset, LinearModel};
use crate::error::{invalid, Error, Result};
use crate::solver::{
    evaluate_objective, max_margin, solve_constrained, solve_intercept_1d, ObjectiveSpec, Point,
    SolveResult, SolverConfig, MAX_MARGIN_MAX_N,
};

/// SVM objectives at or below this value trigger the maximum-margin check.
const ZERO_OBJECTIVE: f64 = 1e-6;

/// Directions shorter than this cannot be normalized.
const MIN_DIRECTION_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Svm,
    Dwd,
    Dwsvm,
    Ndwsvm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Svm, Method::Dwd, Method::Dwsvm, Method::Ndwsvm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Svm => "SVM",
            Method::Dwd => "DWD",
            Method::Dwsvm => "DWSVM",
            Method::Ndwsvm => "nDWSVM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Case-insensitive method name.
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(alloc::format!("unknown method '{s}'")))
    }
}

/// Solver outcome of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Objective at the returned point (for nDWSVM, of the DWD step).
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The SVM objective was zero and the maximum-margin hyperplane was returned.
    pub max_margin: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedClassifier {
    pub method: Method,
    pub model: LinearModel,
    pub hyperparams: Hyperparams,
    pub diagnostics: FitDiagnostics,
}

impl FittedClassifier {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.model.predict(x)
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        self.model.decision(x)
    }
}

fn diagnostics(result: &SolveResult) -> FitDiagnostics {
    FitDiagnostics {
        objective: result.objective,
        converged: result.converged,
        iterations: result.iterations,
        max_margin: false,
    }
}

/// Rescales the solution so the direction has unit norm.
fn unit_model(result: &SolveResult) -> Result<LinearModel> {
    let n = norm(&result.omega);
    if !(n > MIN_DIRECTION_NORM && n.is_finite()) {
        return Err(Error::Numerical("fitted direction is zero".into()));
    }
    Ok(LinearModel::new(
        result.omega.iter().map(|w| w / n).collect(),
        result.beta / n,
        result.beta0.map(|b| b / n),
    ))
}

/// Hinge loss over the unit ball.
///
/// When the optimal objective is zero every separating direction with
/// margins of at least `1/sqrt(c_svm)` is optimal; the maximum-margin
/// hyperplane is then returned as the canonical solution.
pub fn fit_svm(data: &LabeledDataset, c_svm: f64, config: &SolverConfig) -> Result<FittedClassifier> {
    data.require_both_classes()?;
    let spec = ObjectiveSpec::svm(data, c_svm)?;
    let result = solve_constrained(&spec, config, None)?;
    let mut diag = diagnostics(&result);
    let mut model = unit_model(&result)?;
    if result.objective <= ZERO_OBJECTIVE && data.len() <= MAX_MARGIN_MAX_N {
        if let Some(mm) = max_margin(data) {
            let point = Point::new(mm.direction, mm.intercept, None);
            let objective = evaluate_objective(&spec, &point)?;
            if objective <= result.objective {
                model = LinearModel::new(point.omega, point.beta, None);
                diag.objective = objective;
                diag.converged = true;
                diag.max_margin = true;
            }
        }
    }
    Ok(FittedClassifier {
        method: Method::Svm,
        model,
        hyperparams: Hyperparams {
            c_svm,
            ..Hyperparams::default()
        },
        diagnostics: diag,
    })
}

/// DWD loss over the unit ball with a single intercept.
pub fn fit_dwd(data: &LabeledDataset, c_dwd: f64, config: &SolverConfig) -> Result<FittedClassifier> {
    data.require_both_classes()?;
    let spec = ObjectiveSpec::dwd(data, c_dwd)?;
    let result = solve_constrained(&spec, config, None)?;
    Ok(FittedClassifier {
        method: Method::Dwd,
        model: unit_model(&result)?,
        hyperparams: Hyperparams {
            c_dwd,
            ..Hyperparams::default()
        },
        diagnostics: diagnostics(&result),
    })
}

/// `alpha` DWD loss on the axillary hyperplane plus `1 - alpha` hinge loss
/// on the main hyperplane, sharing one direction.
///
/// At `alpha = 0` the DWD terms vanish and the SVM fit is returned, with
/// the axillary intercept set equal to the main one.
pub fn fit_dwsvm(data: &LabeledDataset, params: &Hyperparams, config: &SolverConfig) -> Result<FittedClassifier> {
    data.require_both_classes()?;
    params.validate()?;
    if params.alpha == 0.0 {
        let svm = fit_svm(data, params.c_svm, config)?;
        let mut model = svm.model;
        model.axillary_intercept = Some(model.intercept);
        return Ok(FittedClassifier {
            method: Method::Dwsvm,
            model,
            hyperparams: *params,
            diagnostics: svm.diagnostics,
        });
    }
    let spec = ObjectiveSpec::dwsvm(data, params)?;
    let result = solve_constrained(&spec, config, None)?;
    Ok(FittedClassifier {
        method: Method::Dwsvm,
        model: unit_model(&result)?,
        hyperparams: *params,
        diagnostics: diagnostics(&result),
    })
}

/// DWD direction, then the exact one-dimensional SVM intercept on the
/// projections. The DWD intercept is discarded.
pub fn fit_ndwsvm(data: &LabeledDataset, c_dwd: f64, c_svm: f64, config: &SolverConfig) -> Result<FittedClassifier> {
    if !(c_svm > 0.0 && c_svm.is_finite()) {
        return Err(invalid("c_svm must be positive and finite"));
    }
    let dwd = fit_dwd(data, c_dwd, config)?;
    let direction = dwd.model.direction;
    let projections: Vec<f64> = data.rows().map(|x| crate::data::dot(x, &direction)).collect();
    let beta = solve_intercept_1d(&projections, data.labels(), c_svm)?;
    Ok(FittedClassifier {
        method: Method::Ndwsvm,
        model: LinearModel::new(direction, beta, None),
        hyperparams: Hyperparams {
            c_svm,
            c_dwd,
            ..Hyperparams::default()
        },
        diagnostics: dwd.diagnostics,
    })
}

/// Fits `method` with the relevant fields of `params`.
pub fn fit(method: Method, data: &LabeledDataset, params: &Hyperparams, config: &SolverConfig) -> Result<FittedClassifier> {
    match method {
        Method::Svm => fit_svm(data, params.c_svm, config),
        Method::Dwd => fit_dwd(data, params.c_dwd, config),
        Method::Dwsvm => fit_dwsvm(data, params, config),
        Method::Ndwsvm => fit_ndwsvm(data, params.c_dwd, params.c_svm, config),
    }
}

/// `100 / s^2` with `s` the median distance over all between-class pairs.
/// An even number of pairs averages the two middle distances.
pub fn default_c_dwd(data: &LabeledDataset) -> Result<f64> {
    data.require_both_classes()?;
    let plus: Vec<&[f64]> = (0..data.len()).filter(|&i| data.label(i) == Label::Pos).map(|i| data.row(i)).collect();
    let minus: Vec<&[f64]> = (0..data.len()).filter(|&i| data.label(i) == Label::Neg).map(|i| data.row(i)).collect();
    let mut dist = Vec::with_capacity(plus.len() * minus.len());
    for p in &plus {
        for m in &minus {
            let sq: f64 = p.iter().zip(*m).map(|(a, b)| (a - b) * (a - b)).sum();
            dist.push(libm::sqrt(sq));
        }
    }
    let n = dist.len();
    let (_, &mut upper, _) = dist.select_nth_unstable_by(n / 2, f64::total_cmp);
    let median = if n % 2 == 1 {
        upper
    } else {
        let lower = dist[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median <= 0.0 {
        return Err(invalid("median between-class distance is zero"));
    }
    Ok(100.0 / (median * median))
}
