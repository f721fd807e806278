//! Twenty-point frontier on the ten-stock universe.

use uncertain_rebalance::frontier::{is_monotone, lambda_grid, scan, Solver, GA_MONOTONE_TOL};
use uncertain_rebalance::ga::GaParams;
use uncertain_rebalance::presets::{level_assets, standard_market};
use uncertain_rebalance::{ModelConfig, PortfolioWeights, RebalanceProblem};

fn main() -> uncertain_rebalance::Result<()> {
    let problem = RebalanceProblem::new(
        level_assets(1, 10)?,
        ModelConfig::default(),
        standard_market(3.0),
        PortfolioWeights::all_risk_free(10),
        9999,
    )?;
    let grid = lambda_grid(&problem, 20)?;
    let frontier = scan(&problem, &Solver::Ga(GaParams::default().with_seed(7)), &grid.lambdas);
    println!("{:>14} {:>14} {:>14} {:>6}", "lambda", "net return", "risk", "held");
    for p in &frontier.points {
        println!(
            "{:>14.6e} {:>14.6e} {:>14.6e} {:>6}",
            p.lambda,
            p.achieved_net_return,
            p.risk,
            p.weights.held_risky()
        );
    }
    println!(
        "{} points, {} dropped, monotone: {}",
        frontier.points.len(),
        frontier.dropped.len(),
        is_monotone(&frontier.points, GA_MONOTONE_TOL)
    );
    Ok(())
}
