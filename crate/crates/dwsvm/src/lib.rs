//! File formats, configuration and experiment runners for the four linear
//! classifiers in [`dwsvm_core`].

pub mod config;
pub mod dataset_io;
pub mod error;
pub mod experiments;
pub mod model_file;

pub use dwsvm_core as core;

use dwsvm_core::rng::Role;
use dwsvm_core::LabeledDataset;

use crate::error::AppResult;

/// Training and balanced test draws from one of the Gaussian examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    pub example: u8,
    pub d: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_test_per_class: usize,
    pub seed: u64,
}

/// Draws `(train, test)` with the streams of replication 0.
pub fn simulate(spec: &SimSpec) -> AppResult<(LabeledDataset, LabeledDataset)> {
    let model = experiments::gaussian_model(spec.example, spec.d)?;
    let train = experiments::simulation::draw(&model, spec.seed, 0, (spec.n_plus, spec.n_minus), (Role::TrainPlus, Role::TrainMinus))?;
    let n_test = (spec.n_test_per_class, spec.n_test_per_class);
    let test = experiments::simulation::draw(&model, spec.seed, 0, n_test, (Role::TestPlus, Role::TestMinus))?;
    Ok((train, test))
}
