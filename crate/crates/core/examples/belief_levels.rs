//! Frontier risk at the same minimum returns for each belief-degree level.

use uncertain_rebalance::frontier::{lambda_grid, scan, Solver};
use uncertain_rebalance::ga::GaParams;
use uncertain_rebalance::presets::{level_assets, standard_market, LEVELS};
use uncertain_rebalance::{ModelConfig, PortfolioWeights, RebalanceProblem};

fn main() -> uncertain_rebalance::Result<()> {
    let problem = |level| {
        RebalanceProblem::new(
            level_assets(level, 10)?,
            ModelConfig::default(),
            standard_market(3.0),
            PortfolioWeights::all_risk_free(10),
            9999,
        )
    };
    // grid means differ in the last bits between levels, so scan up to the smallest maximum
    let mut lambdas = Vec::new();
    let mut top = f64::INFINITY;
    for l in 1..=LEVELS {
        let g = lambda_grid(&problem(l)?, 8)?;
        if g.lambda_max < top {
            top = g.lambda_max;
            lambdas = g.lambdas;
        }
    }
    let solver = Solver::Ga(GaParams::default().with_seed(3));
    print!("{:>12}", "lambda");
    for l in 1..=LEVELS {
        print!(" {:>11}", format!("level {l}"));
    }
    println!();
    let scans = (1..=LEVELS)
        .map(|l| problem(l).map(|p| scan(&p, &solver, &lambdas)))
        .collect::<uncertain_rebalance::Result<Vec<_>>>()?;
    for &lambda in &lambdas {
        print!("{lambda:>12.4e}");
        for s in &scans {
            match s.points.iter().find(|p| p.lambda == lambda) {
                Some(p) => print!(" {:>11.4e}", p.risk),
                None => print!(" {:>11}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
