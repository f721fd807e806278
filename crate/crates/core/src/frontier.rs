//! Efficient frontier by sweeping the minimum-return constraint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{evolve, GaParams, Solution};
use crate::model::{PortfolioWeights, RebalanceProblem};
use crate::oracle::{close_budget, enumerate_optimum, OracleParams};

pub const DEFAULT_POINTS: usize = 20;

/// Relative tolerance on risk monotonicity for stochastic solvers.
pub const GA_MONOTONE_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub achieved_net_return: f64,
    pub risk: f64,
    pub weights: PortfolioWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambdas: Vec<f64>,
    pub lambda_max: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solver {
    Ga(GaParams),
    Oracle(OracleParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPoint {
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrontierScan {
    /// Retained non-dominated points in increasing `lambda`.
    pub points: Vec<FrontierPoint>,
    pub dropped: Vec<DroppedPoint>,
    /// Feasible points removed by the non-dominated filter.
    pub dominated: usize,
}

/// Net return of the best single-stock allocation, or of keeping the current
/// holdings rescaled to the exposure, whichever is larger.
pub fn max_net_return(problem: &RebalanceProblem) -> f64 {
    let exposure = problem.exposure();
    let n1 = problem.specs.len();
    let mut best = f64::NEG_INFINITY;
    let mut consider = |mut x: Vec<f64>| {
        close_budget(problem, &mut x, exposure);
        for (w, s) in x.iter_mut().zip(&problem.specs).skip(1) {
            *w = w.min(s.upper);
        }
        best = best.max(problem.net_return(&x));
    };
    for i in 1..n1 {
        let mut x = vec![0.0; n1];
        x[0] = 1.0 - exposure;
        x[i] = exposure;
        consider(x);
    }
    let held: f64 = problem.before.risky().iter().sum();
    if held > 0.0 {
        let mut x: Vec<f64> = problem.before.as_slice().to_vec();
        x[0] = 1.0 - exposure;
        x[1..].iter_mut().for_each(|g| *g *= exposure / held);
        consider(x);
    }
    best
}

/// Evenly spaced minimum returns from the risk-free rate to the largest
/// achievable net return.
pub fn lambda_grid(problem: &RebalanceProblem, count: usize) -> Result<LambdaGrid> {
    if count < 2 {
        return Err(Error::param(format!(
            "lambda grid needs at least 2 points, got {count}"
        )));
    }
    let rf = problem.config.risk_free_rate;
    let lambda_max = max_net_return(problem);
    if lambda_max < rf {
        return Ok(LambdaGrid {
            lambdas: Vec::new(),
            lambda_max,
            diagnostic: Some(format!(
                "no allocation beats the risk-free rate after costs (best net return {lambda_max:.6e} < {rf:.6e})"
            )),
        });
    }
    let span = lambda_max - rf;
    let lambdas = (0..count)
        .map(|i| {
            if i + 1 == count {
                lambda_max
            } else {
                rf + span * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    Ok(LambdaGrid {
        lambdas,
        lambda_max,
        diagnostic: None,
    })
}

/// Sub-seed for the `index`-th independent solve of a run.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Solves one epsilon-constrained problem; `Ok(None)` when it is infeasible.
pub fn solve_point(problem: &RebalanceProblem, solver: &Solver, index: usize) -> Result<Option<Solution>> {
    match solver {
        Solver::Ga(params) => {
            let params = params.clone().with_seed(point_seed(params.seed, index));
            Ok(evolve(&params, problem)?.best_feasible)
        }
        Solver::Oracle(params) => Ok(enumerate_optimum(problem, params)?.best),
    }
}

/// Keeps points not dominated in (lower risk, higher net return).
pub fn non_dominated(points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    let keep: Vec<bool> = points
        .iter()
        .map(|p| {
            !points.iter().any(|q| {
                q.risk <= p.risk
                    && q.achieved_net_return >= p.achieved_net_return
                    && (q.risk < p.risk || q.achieved_net_return > p.achieved_net_return)
            })
        })
        .collect();
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

pub fn scan(problem: &RebalanceProblem, solver: &Solver, lambdas: &[f64]) -> FrontierScan {
    let solved: Vec<(f64, Result<Option<Solution>>)> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let outcome = problem.with_min_return(lambda).and_then(|p| solve_point(&p, solver, i));
            (lambda, outcome)
        })
        .collect();

    let mut found = Vec::new();
    let mut dropped = Vec::new();
    for (lambda, outcome) in solved {
        match outcome {
            Ok(Some(s)) => found.push(FrontierPoint {
                lambda,
                achieved_net_return: s.net_return,
                risk: s.risk,
                weights: s.weights,
            }),
            Ok(None) => dropped.push(DroppedPoint {
                lambda,
                reason: "infeasible".into(),
            }),
            Err(e) => dropped.push(DroppedPoint {
                lambda,
                reason: e.to_string(),
            }),
        }
    }
    let solved = found.len();
    let mut points = non_dominated(found);
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    FrontierScan {
        dominated: solved - points.len(),
        points,
        dropped,
    }
}

/// Whether risk is nondecreasing along the points up to a relative tolerance.
pub fn is_monotone(points: &[FrontierPoint], rel_tol: f64) -> bool {
    points.windows(2).all(|w| w[1].risk >= w[0].risk * (1.0 - rel_tol))
}
