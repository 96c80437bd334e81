//! Linear large-margin classifiers on a shared constrained convex solver.
//!
//! Four methods are provided: the support vector machine (SVM),
//! distance-weighted discrimination (DWD), the distance-weighted support
//! vector machine (DWSVM) and its two-step prototype (nDWSVM). All of them
//! minimize sums of the modified hinge loss and/or the DWD loss over a unit
//! ball of directions, see [`solver`].
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats and the
//! experiment runner live in the companion `dwsvm` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classifiers;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod loss;
pub mod rng;
pub mod simgen;
pub mod solver;
pub mod theory;

mod numeric;

pub use classifiers::{FittedClassifier, Method};
pub use data::{Hyperparams, Label, LabeledDataset, LinearModel};
pub use error::{Error, Result};
pub use loss::LossKind;
