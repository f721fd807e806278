//! Genetic algorithm against exhaustive lattice enumeration on four stocks.

use uncertain_rebalance::frontier::lambda_grid;
use uncertain_rebalance::ga::{evolve, GaParams};
use uncertain_rebalance::oracle::{enumerate_optimum, rpd, OracleParams};
use uncertain_rebalance::presets::small_instance;
use uncertain_rebalance::RebalanceProblem;

fn main() -> uncertain_rebalance::Result<()> {
    let inst = small_instance();
    let problem = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before, 9999)?;
    let grid = lambda_grid(&problem, 5)?;
    for &lambda in &grid.lambdas {
        let p = problem.with_min_return(lambda)?;
        let oracle = enumerate_optimum(&p, &OracleParams::default())?;
        let Some(base) = oracle.best else {
            println!("lambda {lambda:.6e}: lattice infeasible");
            continue;
        };
        let ga = evolve(&GaParams::default().with_seed(1), &p)?;
        let dev = ga.best_feasible.as_ref().map(|s| rpd(s.risk, base.risk)).transpose()?;
        println!(
            "lambda {lambda:.6e}  nodes {:>5}  oracle {:.6e}  ga {:.6e}  rpd {:+.3}%",
            oracle.nodes,
            base.risk,
            ga.best_risk(),
            dev.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
