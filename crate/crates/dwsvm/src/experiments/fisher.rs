//! Conditional-risk minimizers over a grid of `(q, alpha, c_svm, c_dwd)`.

use std::fmt::Write as _;

use dwsvm_core::theory::{fisher_point, RiskPoint};

use super::Report;
use crate::config::ExperimentConfig;
use crate::error::AppResult;

#[derive(Debug, Clone, PartialEq)]
pub struct FisherResult {
    pub points: Vec<RiskPoint>,
}

/// Every combination of `q_grid x alpha_grid x c_grid (c_svm) x c_grid (c_dwd)`.
pub fn run(cfg: &ExperimentConfig) -> AppResult<FisherResult> {
    let mut points = Vec::new();
    for &q in &cfg.q_grid {
        for &alpha in &cfg.alpha_grid {
            for &c_svm in &cfg.c_grid {
                for &c_dwd in &cfg.c_grid {
                    points.push(fisher_point(q, alpha, c_svm, c_dwd)?);
                }
            }
        }
    }
    Ok(FisherResult { points })
}

impl FisherResult {
    pub fn all_consistent(&self) -> bool {
        self.points.iter().all(RiskPoint::is_consistent)
    }

    pub fn report(&self) -> Report {
        let mut table = String::from("q,alpha,c_svm,c_dwd,f,f0,risk,hinge_risk,dwd_risk,consistent,at_boundary\n");
        for p in &self.points {
            let _ = writeln!(
                table,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.q,
                p.alpha,
                p.c_svm,
                p.c_dwd,
                p.f,
                p.f0,
                p.risk,
                p.hinge_risk,
                p.dwd_risk,
                p.is_consistent(),
                p.at_boundary
            );
        }
        let consistent = self.points.iter().filter(|p| p.is_consistent()).count();
        let flagged = self.points.iter().filter(|p| p.at_boundary).count();
        let summary = format!("cells,consistent,at_boundary\n{},{consistent},{flagged}\n", self.points.len());
        Report {
            files: vec![("fisher.csv", table), ("summary.csv", summary)],
            timings: String::from("seconds\n"),
            failures: Vec::new(),
            nonconverged: 0,
        }
    }
}
