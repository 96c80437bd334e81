//! The production solvers against the exhaustive small-instance minimizer.

use dwsvm_core::rng::stream_rng;
use dwsvm_core::solver::{
    evaluate_objective, oracle_solve_small, solve_constrained, solve_penalized, Algorithm, Constraint, ObjectiveSpec,
    Point, SolverConfig,
};
use dwsvm_core::{Hyperparams, Label, LabeledDataset};
use rand::seq::SliceRandom;
use rand::Rng;

const INSTANCES: u64 = 50;
const GAP: f64 = 1e-5;

/// `n` in 4..=10 points in one or two dimensions, classes shifted apart by a
/// random amount so that some instances separate and some overlap.
fn instance(seed: u64) -> (LabeledDataset, f64, f64, f64) {
    let mut rng = stream_rng(7, seed);
    let n = rng.random_range(4..=10);
    let d = rng.random_range(1..=2);
    let shift = rng.random_range(0.0..2.0);
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Pos } else { Label::Neg };
        for _ in 0..d {
            let z: f64 = rng.random_range(-1.5..1.5);
            features.push(z + label.sign() * shift);
        }
        labels.push(label);
    }
    let c_svm = 10f64.powf(rng.random_range(-1.0..2.0));
    let c_dwd = 10f64.powf(rng.random_range(-1.0..2.0));
    let alpha = rng.random_range(0.1..0.9);
    (LabeledDataset::new(features, labels, d).unwrap(), c_svm, c_dwd, alpha)
}

fn relative_gap(solver: f64, oracle: f64) -> f64 {
    (solver - oracle).abs() / (1.0 + oracle.abs())
}

fn check_all(name: &str, build: impl Fn(&LabeledDataset, f64, f64, f64) -> ObjectiveSpec<'_>, config: &SolverConfig) {
    let mut worst = 0.0f64;
    for s in 0..INSTANCES {
        let (data, c_svm, c_dwd, alpha) = instance(s);
        let spec = build(&data, c_svm, c_dwd, alpha);
        let solved = solve_constrained(&spec, config, None).unwrap();
        let oracle = oracle_solve_small(&spec, 1e-10).unwrap();
        let gap = relative_gap(solved.objective, oracle.objective);
        assert!(gap <= GAP, "{name} instance {s}: solver {} oracle {} gap {gap:e}", solved.objective, oracle.objective);
        worst = worst.max(gap);
    }
    eprintln!("{name}: worst relative gap {worst:e}");
}

fn svm(data: &LabeledDataset, c_svm: f64, _: f64, _: f64) -> ObjectiveSpec<'_> {
    ObjectiveSpec::svm(data, c_svm).unwrap()
}

fn dwd(data: &LabeledDataset, _: f64, c_dwd: f64, _: f64) -> ObjectiveSpec<'_> {
    ObjectiveSpec::dwd(data, c_dwd).unwrap()
}

fn dwsvm(data: &LabeledDataset, c_svm: f64, c_dwd: f64, alpha: f64) -> ObjectiveSpec<'_> {
    ObjectiveSpec::dwsvm(data, &Hyperparams { c_svm, c_dwd, alpha, lambda: 0.0 }).unwrap()
}

#[test]
fn svm_matches_oracle() {
    check_all("SVM", svm, &SolverConfig::default());
}

#[test]
fn dwd_matches_oracle() {
    check_all("DWD", dwd, &SolverConfig::default());
}

#[test]
fn dwsvm_matches_oracle() {
    check_all("DWSVM", dwsvm, &SolverConfig::default());
}

#[test]
fn dual_engine_matches_oracle() {
    let config = SolverConfig {
        algorithm: Algorithm::Dual,
        ..SolverConfig::default()
    };
    check_all("SVM dual", svm, &config);
    check_all("DWD dual", dwd, &config);
    check_all("DWSVM dual", dwsvm, &config);
}

#[test]
fn oracle_solves_symmetric_pair() {
    // x = +-1 with C = 1: w = 1, b = 0 puts both margins at the kink 1/sqrt(C).
    let data = LabeledDataset::new(vec![1.0, -1.0], vec![Label::Pos, Label::Neg], 1).unwrap();
    let svm = oracle_solve_small(&ObjectiveSpec::svm(&data, 1.0).unwrap(), 1e-10).unwrap();
    assert!(svm.objective.abs() < 1e-9);
    // DWD at the same point: 2 (2 sqrt(C) - C) = 2, and no other point does better.
    let dwd = oracle_solve_small(&ObjectiveSpec::dwd(&data, 1.0).unwrap(), 1e-10).unwrap();
    assert!((dwd.objective - 2.0).abs() < 1e-8, "{}", dwd.objective);
    assert!((dwd.omega[0] - 1.0).abs() < 1e-4 && dwd.beta.abs() < 1e-4);
}

#[test]
fn best_so_far_trace_is_monotone_and_iterates_feasible() {
    for s in 0..10 {
        let (data, c_svm, c_dwd, alpha) = instance(s);
        for algorithm in [Algorithm::Accelerated, Algorithm::Dual, Algorithm::Auto] {
            let config = SolverConfig {
                algorithm,
                record_trace: true,
                ..SolverConfig::default()
            };
            let spec = dwsvm(&data, c_svm, c_dwd, alpha);
            let out = solve_constrained(&spec, &config, None).unwrap();
            assert!(!out.trace.is_empty());
            assert!(out.trace.windows(2).all(|w| w[1] <= w[0]), "{algorithm:?} trace increases");
            let norm: f64 = out.omega.iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!(norm <= 1.0 + 1e-12, "{algorithm:?} left the unit ball: {norm}");
        }
    }
}

#[test]
fn shuffling_observations_keeps_the_objective() {
    for s in 0..10 {
        let (data, c_svm, c_dwd, alpha) = instance(s);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut stream_rng(11, s));
        let shuffled = data.subset(&order).unwrap();
        let config = SolverConfig::default();
        let a = solve_constrained(&dwsvm(&data, c_svm, c_dwd, alpha), &config, None).unwrap();
        let b = solve_constrained(&dwsvm(&shuffled, c_svm, c_dwd, alpha), &config, None).unwrap();
        assert!(relative_gap(a.objective, b.objective) <= GAP, "{} vs {}", a.objective, b.objective);
    }
}

#[test]
fn objective_subgradient_matches_finite_differences() {
    // Away from every kink the objective is differentiable; its central
    // differences must agree with the closed-form gradient built from the
    // loss derivatives.
    let (data, c_svm, c_dwd, alpha) = instance(3);
    let spec = dwsvm(&data, c_svm, c_dwd, alpha);
    let point = Point::new(vec![0.3; data.dim()], 0.11, Some(-0.07));
    let h = 1e-6;
    let value = |p: &Point| evaluate_objective(&spec, p).unwrap();
    let mut analytic_beta = 0.0;
    let mut analytic_beta0 = 0.0;
    for term in spec.terms() {
        let y = data.label(term.index).sign();
        let u = spec.margin(term, &point);
        let g = term.weight * term.kind.derivative(u, term.c) * y;
        if term.kind == dwsvm_core::LossKind::Hinge {
            analytic_beta += g;
        } else {
            analytic_beta0 += g;
        }
    }
    let mut plus = point.clone();
    plus.beta += h;
    let mut minus = point.clone();
    minus.beta -= h;
    let numeric_beta = (value(&plus) - value(&minus)) / (2.0 * h);
    assert!((numeric_beta - analytic_beta).abs() <= 1e-6 * (1.0 + analytic_beta.abs()));
    let mut plus = point.clone();
    plus.beta0 = point.beta0.map(|b| b + h);
    let mut minus = point.clone();
    minus.beta0 = point.beta0.map(|b| b - h);
    let numeric_beta0 = (value(&plus) - value(&minus)) / (2.0 * h);
    assert!((numeric_beta0 - analytic_beta0).abs() <= 1e-6 * (1.0 + analytic_beta0.abs()));
}

#[test]
fn penalized_solution_solves_the_matching_ball() {
    // If w_p minimizes G(w) + lambda/2 ||w||^2 then it minimizes G over the
    // ball of radius ||w_p||. Scaling the data by r = ||w_p|| maps that ball
    // onto the unit ball, so both solves must reach the same loss.
    for s in 0..10 {
        let (data, c_svm, c_dwd, alpha) = instance(s);
        let lambda = 0.5;
        let penalized_spec = dwsvm(&data, c_svm, c_dwd, alpha).with_constraint(Constraint::Penalty(lambda)).unwrap();
        let config = SolverConfig {
            algorithm: Algorithm::Accelerated,
            max_iters: 200_000,
            tol: 1e-12,
            ..SolverConfig::default()
        };
        let pen = solve_penalized(&penalized_spec, &config, None).unwrap();
        let r: f64 = pen.omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(r > 1e-3, "instance {s}: penalized direction vanished");
        let loss = pen.objective - 0.5 * lambda * r * r;
        let scaled = data.map_features(|_, v| v * r).unwrap();
        let ball = oracle_solve_small(&dwsvm(&scaled, c_svm, c_dwd, alpha), 1e-10).unwrap();
        assert!(relative_gap(loss, ball.objective) <= 1e-4, "instance {s}: penalized loss {loss} ball {}", ball.objective);
    }
}
