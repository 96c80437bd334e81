use alloc::vec::Vec;

use crate::data::{dot, Hyperparams, LabeledDataset};
use crate::error::{check_dim, invalid, Error, Result};
use crate::loss::LossKind;

/// Which intercept a loss term is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterceptSlot {
    Main,
    Axillary,
}

/// One weighted loss term `weight * loss_c(y_i (x_i'w + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub kind: LossKind,
    pub weight: f64,
    pub c: f64,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `||w||^2 <= 1`.
    UnitBall,
    /// Adds `lambda / 2 ||w||^2` and leaves `w` unconstrained.
    Penalty(f64),
}

/// A convex objective over `(b0, b, w)` built from loss terms on a dataset.
///
/// Hinge terms always use the main intercept. DWD terms use the axillary
/// intercept when the spec has one and the main intercept otherwise.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec<'a> {
    data: &'a LabeledDataset,
    terms: Vec<Term>,
    constraint: Constraint,
    axillary: bool,
}

impl<'a> ObjectiveSpec<'a> {
    pub fn new(
        data: &'a LabeledDataset,
        terms: Vec<Term>,
        constraint: Constraint,
        axillary: bool,
    ) -> Result<Self> {
        for term in &terms {
            if term.index >= data.len() {
                return Err(invalid(alloc::format!(
                    "term references observation {} of {}",
                    term.index,
                    data.len()
                )));
            }
            if !(term.weight >= 0.0 && term.weight.is_finite()) {
                return Err(invalid("term weights must be nonnegative and finite"));
            }
            if !(term.c > 0.0 && term.c.is_finite()) {
                return Err(invalid("term C must be positive and finite"));
            }
        }
        if let Constraint::Penalty(lambda) = constraint {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(invalid("penalty lambda must be nonnegative"));
            }
        }
        Ok(Self {
            data,
            terms,
            constraint,
            axillary,
        })
    }

    /// One hinge term per observation, unit weight.
    pub fn svm(data: &'a LabeledDataset, c_svm: f64) -> Result<Self> {
        let terms = (0..data.len())
            .map(|index| Term {
                kind: LossKind::Hinge,
                weight: 1.0,
                c: c_svm,
                index,
            })
            .collect();
        Self::new(data, terms, Constraint::UnitBall, false)
    }

    /// One DWD term per observation on a single (main) intercept.
    pub fn dwd(data: &'a LabeledDataset, c_dwd: f64) -> Result<Self> {
        let terms = (0..data.len())
            .map(|index| Term {
                kind: LossKind::Dwd,
                weight: 1.0,
                c: c_dwd,
                index,
            })
            .collect();
        Self::new(data, terms, Constraint::UnitBall, false)
    }

    /// `alpha V_{C_dwd}(y f0) + (1 - alpha) H_{C_svm}(y f)` per observation.
    pub fn dwsvm(data: &'a LabeledDataset, params: &Hyperparams) -> Result<Self> {
        params.validate()?;
        let mut terms = Vec::with_capacity(2 * data.len());
        for index in 0..data.len() {
            terms.push(Term {
                kind: LossKind::Dwd,
                weight: params.alpha,
                c: params.c_dwd,
                index,
            });
            terms.push(Term {
                kind: LossKind::Hinge,
                weight: 1.0 - params.alpha,
                c: params.c_svm,
                index,
            });
        }
        Self::new(data, terms, Constraint::UnitBall, true)
    }

    /// The same objective with the constraint replaced.
    pub fn with_constraint(mut self, constraint: Constraint) -> Result<Self> {
        if let Constraint::Penalty(lambda) = constraint {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(invalid("penalty lambda must be nonnegative"));
            }
        }
        self.constraint = constraint;
        Ok(self)
    }

    pub fn data(&self) -> &'a LabeledDataset {
        self.data
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn has_axillary(&self) -> bool {
        self.axillary
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn slot(&self, term: &Term) -> InterceptSlot {
        match term.kind {
            LossKind::Dwd if self.axillary => InterceptSlot::Axillary,
            _ => InterceptSlot::Main,
        }
    }

    /// Number of optimization variables: `d`, the main intercept and possibly `b0`.
    pub fn variable_count(&self) -> usize {
        self.dim() + 1 + usize::from(self.axillary)
    }

    /// Functional margin of a term at a point.
    pub fn margin(&self, term: &Term, point: &Point) -> f64 {
        let offset = match self.slot(term) {
            InterceptSlot::Main => point.beta,
            InterceptSlot::Axillary => point.beta0.unwrap_or(point.beta),
        };
        let y = self.data.label(term.index).sign();
        y * (dot(self.data.row(term.index), &point.omega) + offset)
    }

    pub(crate) fn check_dim_only(&self, point: &Point) -> Result<()> {
        check_dim(self.dim(), point.omega.len())
    }

    pub(crate) fn check_point(&self, point: &Point) -> Result<()> {
        check_dim(self.dim(), point.omega.len())?;
        if self.axillary && point.beta0.is_none() {
            return Err(Error::MissingAxillary);
        }
        Ok(())
    }
}

/// A point `(b0, b, w)` of an objective's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub omega: Vec<f64>,
    pub beta: f64,
    pub beta0: Option<f64>,
}

impl Point {
    pub fn new(omega: Vec<f64>, beta: f64, beta0: Option<f64>) -> Self {
        Self { omega, beta, beta0 }
    }
}
