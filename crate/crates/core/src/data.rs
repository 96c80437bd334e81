//! Datasets, fitted linear models and hyperparameters.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_dim, invalid, Error, Result};

/// A binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    /// Classification rule for a decision value; exact zero maps to [`Label::Pos`].
    #[inline]
    pub fn from_decision(value: f64) -> Label {
        if value >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// Parses `+1`, `1` or `-1` (surrounding whitespace allowed).
    pub fn parse(text: &str) -> Option<Label> {
        match text.trim() {
            "+1" | "1" | "+1.0" | "1.0" => Some(Label::Pos),
            "-1" | "-1.0" => Some(Label::Neg),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Pos => f.write_str("+1"),
            Label::Neg => f.write_str("-1"),
        }
    }
}

/// `n` observations in `R^d` stored row-major, each with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    dim: usize,
}

impl LabeledDataset {
    /// Builds a dataset from row-major features.
    ///
    /// Requires `n >= 1`, `d >= 1`, `features.len() == n * d` and finite entries.
    pub fn new(features: Vec<f64>, labels: Vec<Label>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if labels.is_empty() {
            return Err(invalid("dataset must contain at least one observation"));
        }
        check_dim(labels.len() * dim, features.len())?;
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!(
                "non-finite feature at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            features,
            labels,
            dim,
        })
    }

    /// Builds a dataset from a slice of rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            features.extend_from_slice(row);
        }
        Self::new(features, labels, dim)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn n_plus(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Pos).count()
    }

    pub fn n_minus(&self) -> usize {
        self.len() - self.n_plus()
    }

    pub fn has_both_classes(&self) -> bool {
        let plus = self.n_plus();
        plus > 0 && plus < self.len()
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(invalid("both classes must be present"))
        }
    }

    /// Per-class feature means `(mean_plus, mean_minus)`; an absent class gives zeros.
    pub fn class_means(&self) -> (Vec<f64>, Vec<f64>) {
        let mut plus = alloc::vec![0.0; self.dim];
        let mut minus = alloc::vec![0.0; self.dim];
        let (mut np, mut nm) = (0usize, 0usize);
        for (row, &label) in self.rows().zip(&self.labels) {
            let (acc, count) = match label {
                Label::Pos => (&mut plus, &mut np),
                Label::Neg => (&mut minus, &mut nm),
            };
            *count += 1;
            for (a, &x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        for (acc, count) in [(&mut plus, np), (&mut minus, nm)] {
            if count > 0 {
                let inv = 1.0 / count as f64;
                acc.iter_mut().for_each(|a| *a *= inv);
            }
        }
        (plus, minus)
    }

    /// The observations at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(invalid(alloc::format!("observation index {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, labels, self.dim)
    }

    /// Same features with replacement labels.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        check_dim(self.len(), labels.len())?;
        Ok(Self {
            features: self.features.clone(),
            labels,
            dim: self.dim,
        })
    }

    /// Concatenates two datasets of equal dimension.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(features, labels, self.dim)
    }

    /// Applies `f` to every feature value.
    pub fn map_features(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let dim = self.dim;
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % dim, v))
            .collect();
        Self::new(features, self.labels.clone(), dim)
    }
}

/// A linear rule `sign(x'w + b)` with unit-norm direction `w`.
///
/// DWSVM additionally carries the intercept of its axillary hyperplane,
/// which never takes part in prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub direction: Vec<f64>,
    pub intercept: f64,
    pub axillary_intercept: Option<f64>,
}

impl LinearModel {
    pub fn new(direction: Vec<f64>, intercept: f64, axillary_intercept: Option<f64>) -> Self {
        Self {
            direction,
            intercept,
            axillary_intercept,
        }
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn direction_norm(&self) -> f64 {
        libm::sqrt(dot(&self.direction, &self.direction))
    }

    /// `x'w`, the projection onto the direction.
    pub fn project(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(dot(&self.direction, x))
    }

    /// `x'w + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        Ok(self.project(x)? + self.intercept)
    }

    /// `y (x'w + b)`, or `y (x'w + b0)` against the axillary hyperplane.
    pub fn functional_margin(&self, x: &[f64], y: Label, use_axillary: bool) -> Result<f64> {
        let offset = if use_axillary {
            self.axillary_intercept.ok_or(Error::MissingAxillary)?
        } else {
            self.intercept
        };
        Ok(y.sign() * (self.project(x)? + offset))
    }

    /// `sign(x'w + b)` with `sign(0) = +1`. The axillary intercept is never read.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_decision(self.decision(x)?))
    }

    /// The model with direction and intercepts negated.
    pub fn negated(&self) -> Self {
        Self {
            direction: self.direction.iter().map(|w| -w).collect(),
            intercept: -self.intercept,
            axillary_intercept: self.axillary_intercept.map(|b| -b),
        }
    }
}

/// Tuning constants shared by the four methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub c_svm: f64,
    pub c_dwd: f64,
    pub alpha: f64,
    /// Only used by the penalized solver.
    pub lambda: f64,
}

impl Default for Hyperparams {
    /// `C_svm = 100`, `alpha = 0.5`, `C_dwd = 1`, `lambda = 0`.
    fn default() -> Self {
        Self {
            c_svm: 100.0,
            c_dwd: 1.0,
            alpha: 0.5,
            lambda: 0.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_svm > 0.0 && self.c_svm.is_finite()) {
            return Err(invalid("c_svm must be positive and finite"));
        }
        if !(self.c_dwd > 0.0 && self.c_dwd.is_finite()) {
            return Err(invalid("c_dwd must be positive and finite"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(invalid("alpha must lie in [0, 1)"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda must be nonnegative"));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn e1_model(beta: f64) -> LinearModel {
        LinearModel::new(vec![1.0, 0.0], beta, None)
    }

    #[test]
    fn functional_margin_examples() {
        assert_eq!(e1_model(0.0).functional_margin(&[2.0, 0.0], Label::Pos, false), Ok(2.0));
        assert_eq!(e1_model(-2.0).functional_margin(&[2.0, 0.0], Label::Pos, false), Ok(0.0));
        assert_eq!(e1_model(0.0).functional_margin(&[2.0, 0.0], Label::Neg, false), Ok(-2.0));
    }

    #[test]
    fn functional_margin_errors() {
        assert_eq!(
            e1_model(0.0).functional_margin(&[2.0], Label::Pos, false),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            e1_model(0.0).functional_margin(&[2.0, 0.0], Label::Pos, true),
            Err(Error::MissingAxillary)
        );
        let m = LinearModel::new(vec![1.0, 0.0], 0.0, Some(0.5));
        assert_eq!(m.functional_margin(&[2.0, 0.0], Label::Neg, true), Ok(-2.5));
    }

    #[test]
    fn predict_examples() {
        assert_eq!(e1_model(0.0).predict(&[3.0, -5.0]), Ok(Label::Pos));
        assert_eq!(e1_model(-4.0).predict(&[3.0, -5.0]), Ok(Label::Neg));
        let with_axillary = LinearModel::new(vec![1.0, 0.0], -4.0, Some(100.0));
        assert_eq!(with_axillary.predict(&[3.0, -5.0]), Ok(Label::Neg));
        // sign(0) = +1
        assert_eq!(e1_model(-3.0).predict(&[3.0, 1.0]), Ok(Label::Pos));
        assert!(e1_model(0.0).predict(&[1.0]).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(LabeledDataset::new(vec![], vec![], 1).is_err());
        assert!(LabeledDataset::new(vec![1.0], vec![Label::Pos], 0).is_err());
        assert!(LabeledDataset::new(vec![1.0, f64::NAN], vec![Label::Pos], 2).is_err());
        assert!(LabeledDataset::new(vec![1.0, 2.0, 3.0], vec![Label::Pos], 2).is_err());
        let ds = LabeledDataset::new(vec![1.0, 2.0, 3.0, 4.0], vec![Label::Pos, Label::Neg], 2)
            .unwrap();
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert_eq!((ds.n_plus(), ds.n_minus()), (1, 1));
        let (p, m) = ds.class_means();
        assert_eq!((p, m), (vec![1.0, 2.0], vec![3.0, 4.0]));
    }

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        let bad_alpha = Hyperparams {
            alpha: 1.0,
            ..Hyperparams::default()
        };
        assert!(bad_alpha.validate().is_err());
        let bad_c = Hyperparams {
            c_svm: 0.0,
            ..Hyperparams::default()
        };
        assert!(bad_c.validate().is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(Label::parse(" +1"), Some(Label::Pos));
        assert_eq!(Label::parse("-1"), Some(Label::Neg));
        assert_eq!(Label::parse("0"), None);
    }
}
