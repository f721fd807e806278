//! CPPI against buy-and-hold on synthetic bear and bull markets.

use uncertain_rebalance::backtest::{
    compare, generate_market, simulate, BacktestModel, Regime, StrategySpec, SyntheticMarketSpec,
};
use uncertain_rebalance::ga::GaParams;
use uncertain_rebalance::presets::level_assets;
use uncertain_rebalance::ModelConfig;

fn main() -> uncertain_rebalance::Result<()> {
    let model = BacktestModel::new(level_assets(1, 10)?, ModelConfig::default(), 100_000.0, 9999)?;
    let ga = GaParams::default().with_seed(1);
    for regime in [Regime::Bear, Regime::Bull] {
        let series = generate_market(&SyntheticMarketSpec::preset(regime, 60, 10), 2)?;
        let cppi = simulate(&StrategySpec::cppi(5.0, 70_000.0), &series, &model, &ga)?;
        let hold = simulate(&StrategySpec::buy_and_hold(0.3), &series, &model, &ga)?;
        println!("{regime:?}");
        for r in compare(&[cppi, hold])? {
            println!(
                "  {:<13} terminal {:>10.2}  min {:>10.2}  costs {:>8.2}  drawdown {:.4}",
                r.label, r.terminal_wealth, r.min_wealth, r.total_cost, r.max_drawdown
            );
        }
    }
    Ok(())
}
