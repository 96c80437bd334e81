//! Test error, direction angles, projections, cross-validation and tuning.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::classifiers::{fit_svm, Method};
use crate::data::{dot, norm, Hyperparams, Label, LabeledDataset, LinearModel};
use crate::error::{check_dim, invalid, Result};
use crate::rng::stream_rng;
use crate::solver::SolverConfig;

/// Unit-norm tolerance accepted by [`angle_between`].
const UNIT_TOL: f64 = 1e-6;

/// Fraction of observations whose predicted label differs from their label.
pub fn misclass_rate(model: &LinearModel, data: &LabeledDataset) -> Result<f64> {
    Ok(misclass_count(model, data, data.labels())? as f64 / data.len() as f64)
}

/// Number of rows predicted differently from `labels`.
pub fn misclass_count(model: &LinearModel, data: &LabeledDataset, labels: &[Label]) -> Result<usize> {
    check_dim(data.len(), labels.len())?;
    check_dim(model.dim(), data.dim())?;
    let mut wrong = 0;
    for (x, &y) in data.rows().zip(labels) {
        if model.predict(x)? != y {
            wrong += 1;
        }
    }
    Ok(wrong)
}

/// Angle in degrees between the lines spanned by two unit vectors, in `[0, 90]`.
pub fn angle_between(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("angle of a zero vector"));
    }
    if (na - 1.0).abs() > UNIT_TOL || (nb - 1.0).abs() > UNIT_TOL {
        return Err(invalid("angle_between needs unit vectors"));
    }
    // 2 atan2(|a - b|, |a + b|) stays accurate near 0 and 180 degrees.
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    let theta = (2.0 * libm::atan2(libm::sqrt(diff), libm::sqrt(sum))).to_degrees();
    Ok(theta.min(180.0 - theta).clamp(0.0, 90.0))
}

/// One observation projected onto a model's direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionRow {
    pub projection: f64,
    pub label: Label,
    /// Functional margin to the main hyperplane.
    pub margin: f64,
    /// Functional margin to the axillary hyperplane, when the model has one.
    pub axillary_margin: Option<f64>,
}

pub fn export_projections(model: &LinearModel, data: &LabeledDataset) -> Result<Vec<ProjectionRow>> {
    check_dim(model.dim(), data.dim())?;
    Ok(data
        .rows()
        .zip(data.labels())
        .map(|(x, &label)| {
            let projection = dot(x, &model.direction);
            let y = label.sign();
            ProjectionRow {
                projection,
                label,
                margin: y * (projection + model.intercept),
                axillary_margin: model.axillary_intercept.map(|b0| y * (projection + b0)),
            }
        })
        .collect())
}

/// Largest fraction of `values` lying within `tol` of a single value.
///
/// The centre is searched over the values themselves, so the result is the
/// share of the densest window `[v - tol, v + tol]`.
pub fn piling_fraction(values: &[f64], tol: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut lo, mut hi, mut best) = (0, 0, 0);
    for i in 0..sorted.len() {
        while sorted[i] - sorted[lo] > tol {
            lo += 1;
        }
        hi = hi.max(i);
        while hi + 1 < sorted.len() && sorted[hi + 1] - sorted[i] <= tol {
            hi += 1;
        }
        best = best.max(hi + 1 - lo);
    }
    best as f64 / sorted.len() as f64
}

/// [`piling_fraction`] of the training margins to the main hyperplane.
pub fn margin_piling(model: &LinearModel, data: &LabeledDataset, tol: f64) -> Result<f64> {
    let margins: Vec<f64> = export_projections(model, data)?.iter().map(|r| r.margin).collect();
    Ok(piling_fraction(&margins, tol))
}

/// A stratified assignment of observations to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    /// Shuffles each class on stream `stream` of `seed` and deals it to the
    /// folds in turn, the negatives continuing where the positives stopped.
    /// Per-class fold sizes therefore differ by at most one.
    ///
    /// Fails unless every fold is nonempty and every training part (the
    /// other `k - 1` folds) contains both classes. Because the dealing is
    /// balanced, this only depends on the class counts, so no resampling is
    /// attempted.
    pub fn stratified(labels: &[Label], k: usize, seed: u64, stream: u64) -> Result<Self> {
        if k < 2 {
            return Err(invalid("cross-validation needs at least two folds"));
        }
        if labels.len() < k {
            return Err(invalid(alloc::format!("{} observations cannot fill {k} folds", labels.len())));
        }
        let mut rng = stream_rng(seed, stream);
        let mut assignment = alloc::vec![0; labels.len()];
        let mut next = 0;
        for class in [Label::Pos, Label::Neg] {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            if members.len() < 2 {
                return Err(invalid(alloc::format!(
                    "class {class} needs at least two observations so every training part contains it"
                )));
            }
            members.shuffle(&mut rng);
            for i in members {
                assignment[i] = next % k;
                next += 1;
            }
        }
        Ok(Self { k, assignment, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index per observation.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `(training indices, held-out indices)` of fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment.len()).partition(|&i| self.assignment[i] != f)
    }
}

/// Flips the labels of `k` random positives and `k` random negatives.
///
/// Each class is shuffled on stream `stream` of `seed` and its first `k`
/// members are flipped, so for a fixed stream the flips for `k` include
/// those for every smaller `k`.
pub fn perturb_labels(labels: &[Label], k: usize, seed: u64, stream: u64) -> Result<Vec<Label>> {
    let mut rng = stream_rng(seed, stream);
    let mut out = labels.to_vec();
    for class in [Label::Pos, Label::Neg] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(invalid(alloc::format!("class {class} has fewer than {k} observations to flip")));
        }
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            out[i] = class.flipped();
        }
    }
    Ok(out)
}

/// Misclassified counts per held-out fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvResult {
    pub per_fold: Vec<usize>,
}

impl CvResult {
    pub fn total(&self) -> usize {
        self.per_fold.iter().sum()
    }

    pub fn mean_per_fold(&self) -> f64 {
        self.total() as f64 / self.per_fold.len() as f64
    }
}

/// Cross-validates `fit` over `plan`.
///
/// Models are trained on the dataset's labels. Held-out rows are scored
/// against `score_labels` when given (for example the labels before a
/// perturbation) and against the dataset's labels otherwise.
pub fn kfold_cv<F>(data: &LabeledDataset, plan: &FoldPlan, mut fit: F, score_labels: Option<&[Label]>) -> Result<CvResult>
where
    F: FnMut(&LabeledDataset) -> Result<LinearModel>,
{
    check_dim(data.len(), plan.assignment.len())?;
    let score = score_labels.unwrap_or(data.labels());
    check_dim(data.len(), score.len())?;
    let mut per_fold = Vec::with_capacity(plan.k);
    for f in 0..plan.k {
        let (train_idx, test_idx) = plan.split(f);
        let model = fit(&data.subset(&train_idx)?)?;
        let test = data.subset(&test_idx)?;
        let truth: Vec<Label> = test_idx.iter().map(|&i| score[i]).collect();
        per_fold.push(misclass_count(&model, &test, &truth)?);
    }
    Ok(CvResult { per_fold })
}

/// `2^-5, 2^-4, ..., 2^12`.
pub fn c_svm_grid() -> Vec<f64> {
    (-5..=12).map(|e| libm::exp2(f64::from(e))).collect()
}

/// Where tuning errors come from.
#[derive(Debug, Clone, Copy)]
pub enum TuningSource<'a> {
    /// Error rate on a separate tuning set.
    Holdout(&'a LabeledDataset),
    /// Cross-validated error rate on the training data.
    Folds(&'a FoldPlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub c_svm: f64,
    /// Tuning error per grid value, in grid order.
    pub errors: Vec<f64>,
}

/// Grid value with the smallest error; ties go to the smaller value.
pub fn select_c(grid: &[f64], errors: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("tuning grid is empty"));
    }
    check_dim(grid.len(), errors.len())?;
    let mut best: Option<(f64, f64)> = None;
    for (&c, &e) in grid.iter().zip(errors) {
        best = match best {
            Some((bc, be)) if be < e || (be == e && bc <= c) => Some((bc, be)),
            _ => Some((c, e)),
        };
    }
    Ok(best.map(|(c, _)| c).unwrap_or(grid[0]))
}

/// SVM error rate at `c_svm` on the tuning source.
pub fn tuning_error(train: &LabeledDataset, source: TuningSource<'_>, c_svm: f64, config: &SolverConfig) -> Result<f64> {
    match source {
        TuningSource::Holdout(tune) => misclass_rate(&fit_svm(train, c_svm, config)?.model, tune),
        TuningSource::Folds(plan) => {
            let cv = kfold_cv(train, plan, |d| Ok(fit_svm(d, c_svm, config)?.model), None)?;
            Ok(cv.total() as f64 / train.len() as f64)
        }
    }
}

/// Chooses `C_svm` from `grid` by SVM tuning error.
pub fn tune_c_svm(train: &LabeledDataset, source: TuningSource<'_>, grid: &[f64], config: &SolverConfig) -> Result<Tuned> {
    if grid.is_empty() {
        return Err(invalid("tuning grid is empty"));
    }
    let errors = grid
        .iter()
        .map(|&c| tuning_error(train, source, c, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(Tuned {
        c_svm: select_c(grid, &errors)?,
        errors,
    })
}

/// One fitted method evaluated in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub method: Method,
    pub d: usize,
    pub replication: u64,
    pub test_error: f64,
    /// Degrees in `[0, 90]`.
    pub angle_to_bayes: f64,
    /// Wall-clock fit time; kept out of [`MetricRecord::csv_row`] so the
    /// metric files stay reproducible.
    pub fit_seconds: f64,
    pub hyperparams: Hyperparams,
}

impl MetricRecord {
    pub const CSV_HEADER: &'static str = "method,d,replication,test_error,angle_to_bayes,c_svm,c_dwd,alpha";

    /// Hyperparameters a method does not use are left empty.
    pub fn csv_row(&self) -> String {
        let h = &self.hyperparams;
        let (c_svm, c_dwd, alpha) = match self.method {
            Method::Svm => (Some(h.c_svm), None, None),
            Method::Dwd => (None, Some(h.c_dwd), None),
            Method::Dwsvm => (Some(h.c_svm), Some(h.c_dwd), Some(h.alpha)),
            Method::Ndwsvm => (Some(h.c_svm), Some(h.c_dwd), None),
        };
        let show = |v: Option<f64>| v.map(|x| alloc::format!("{x}")).unwrap_or_default();
        alloc::format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.d,
            self.replication,
            self.test_error,
            self.angle_to_bayes,
            show(c_svm),
            show(c_dwd),
            show(alpha)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(n: usize) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 - n as f64 / 2.0 + 0.5]).collect();
        let labels = rows.iter().map(|r| Label::from_decision(r[0])).collect();
        LabeledDataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn error_rates() {
        let data = line(8);
        let good = LinearModel::new(vec![1.0], 0.0, None);
        assert_eq!(misclass_rate(&good, &data).unwrap(), 0.0);
        assert_eq!(misclass_rate(&good.negated(), &data).unwrap(), 1.0);
    }

    #[test]
    fn angles() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(angle_between(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((angle_between(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 90.0).abs() < 1e-12);
        assert_eq!(angle_between(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 0.0);
        assert!((angle_between(&[1.0, 0.0], &[-s, s]).unwrap() - 45.0).abs() < 1e-12);
        assert!(angle_between(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(angle_between(&[2.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn projections_schema() {
        let data = line(4);
        let m = LinearModel::new(vec![1.0], 0.5, Some(-0.5));
        let rows = export_projections(&m, &data).unwrap();
        assert_eq!(rows[0].projection, data.row(0)[0]);
        assert!(rows.iter().all(|r| r.axillary_margin.is_some()));
        let plain = LinearModel::new(vec![1.0], 0.5, None);
        assert!(export_projections(&plain, &data).unwrap().iter().all(|r| r.axillary_margin.is_none()));
    }

    #[test]
    fn piling() {
        assert_eq!(piling_fraction(&[1.0, 1.0005, 1.0009, 3.0], 1e-3), 0.75);
        assert_eq!(piling_fraction(&[0.0, 1.0, 2.0, 3.0], 1e-3), 0.25);
        assert_eq!(piling_fraction(&[], 1e-3), 0.0);
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<Label> = (0..23).map(|i| if i % 3 == 0 { Label::Neg } else { Label::Pos }).collect();
        let plan = FoldPlan::stratified(&labels, 3, 5, 0).unwrap();
        for class in [Label::Pos, Label::Neg] {
            let mut sizes = [0usize; 3];
            for (i, &f) in plan.assignment().iter().enumerate() {
                if labels[i] == class {
                    sizes[f] += 1;
                }
            }
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        assert_eq!(plan, FoldPlan::stratified(&labels, 3, 5, 0).unwrap());
        assert!(FoldPlan::stratified(&labels, 1, 5, 0).is_err());
        let lonely = [Label::Pos, Label::Pos, Label::Neg];
        assert!(FoldPlan::stratified(&lonely, 2, 5, 0).is_err());
    }

    #[test]
    fn leave_one_out_on_separated_clusters() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![if i < 5 { i as f64 - 10.0 } else { i as f64 + 2.0 }]).collect();
        let labels = rows.iter().map(|r| Label::from_decision(r[0])).collect();
        let data = LabeledDataset::from_rows(&rows, labels).unwrap();
        let plan = FoldPlan::stratified(data.labels(), 10, 1, 0).unwrap();
        let cfg = SolverConfig::default();
        let fit = |d: &LabeledDataset| Ok(fit_svm(d, 1.0, &cfg)?.model);
        let cv = kfold_cv(&data, &plan, fit, None).unwrap();
        assert_eq!(cv.total(), 0);
        let same = kfold_cv(&data, &plan, fit, Some(data.labels())).unwrap();
        assert_eq!(same, cv);
    }

    #[test]
    fn perturbation_is_nested() {
        let labels: Vec<Label> = (0..12).map(|i| if i < 8 { Label::Pos } else { Label::Neg }).collect();
        let one = perturb_labels(&labels, 1, 3, 9).unwrap();
        let two = perturb_labels(&labels, 2, 3, 9).unwrap();
        let changed = |p: &[Label]| (0..12).filter(|&i| p[i] != labels[i]).collect::<Vec<_>>();
        assert_eq!(changed(&one).len(), 2);
        assert_eq!(changed(&two).len(), 4);
        assert!(changed(&one).iter().all(|i| changed(&two).contains(i)));
        assert_eq!(perturb_labels(&labels, 0, 3, 9).unwrap(), labels);
        assert!(perturb_labels(&labels, 5, 3, 9).is_err());
    }

    #[test]
    fn grid_selection() {
        let grid = c_svm_grid();
        assert_eq!(grid.len(), 18);
        assert_eq!((grid[0], grid[17]), (1.0 / 32.0, 4096.0));
        assert_eq!(select_c(&[4.0], &[0.3]).unwrap(), 4.0);
        assert_eq!(select_c(&[8.0, 1.0, 2.0], &[0.1, 0.2, 0.1]).unwrap(), 2.0);
        assert!(select_c(&[], &[]).is_err());
    }
}
