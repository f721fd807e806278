//! Quantile-grid moments of single assets and a portfolio against closed forms.

use uncertain_rebalance::presets::level_distributions;
use uncertain_rebalance::uncertainty::{MomentKernel, DEFAULT_LEVELS};
use uncertain_rebalance::{QuantileGrid, UncertainDistribution};

fn main() -> uncertain_rebalance::Result<()> {
    let mut dists = level_distributions(1)?;
    dists.push(UncertainDistribution::linear(-0.02, 0.03)?);
    let grid = QuantileGrid::build(&dists, DEFAULT_LEVELS)?;

    println!(
        "{:>5} {:>9} {:>14} {:>14} {:>14} {:>14}",
        "asset", "family", "E closed", "E grid", "V closed", "V grid"
    );
    for (i, d) in dists.iter().enumerate() {
        let mut w = vec![0.0; dists.len()];
        w[i] = 1.0;
        let m = grid.portfolio_moments(&w)?;
        println!(
            "{i:>5} {:>9} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            d.family(),
            d.expected_value(),
            m.expected,
            d.variance(),
            m.variance
        );
    }

    // the kernel reproduces the grid for any weights
    let kernel = MomentKernel::from_grid(&grid);
    let w: Vec<f64> = (0..dists.len()).map(|i| 1.0 / (i + 2) as f64).collect();
    let direct = grid.portfolio_moments(&w)?;
    let fast = kernel.moments(&w)?;
    println!(
        "portfolio: grid V = {:.12e}, kernel V = {:.12e}",
        direct.variance, fast.variance
    );
    Ok(())
}
