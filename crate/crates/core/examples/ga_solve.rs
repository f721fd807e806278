//! One genetic-algorithm solve on the ten-stock universe.

use uncertain_rebalance::ga::{evolve, GaParams};
use uncertain_rebalance::presets::{level_assets, standard_market};
use uncertain_rebalance::{ModelConfig, PortfolioWeights, RebalanceProblem};

fn main() -> uncertain_rebalance::Result<()> {
    let specs = level_assets(1, 10)?;
    let config = ModelConfig {
        min_return: 0.01,
        ..ModelConfig::default()
    };
    let problem = RebalanceProblem::new(
        specs,
        config,
        standard_market(3.0),
        PortfolioWeights::all_risk_free(10),
        9999,
    )?;
    let result = evolve(&GaParams::default().with_seed(42), &problem)?;

    println!(
        "generations {} evaluations {}",
        result.generations_run, result.evaluations
    );
    for (g, f) in result.fitness_trace.iter().enumerate().step_by(25) {
        println!("gen {g:>4} best fitness {f:.8}");
    }
    match &result.best_feasible {
        Some(s) => {
            println!("risk {:.6e} net return {:.6e}", s.risk, s.net_return);
            for (i, w) in s.weights.as_slice().iter().enumerate().filter(|(_, w)| **w > 0.0) {
                println!("  asset {i:>2}: {w:.6}");
            }
            println!("{}", problem.check(&s.weights)?);
        }
        None => println!("no feasible portfolio found"),
    }
    Ok(())
}
