//! Buy/sell plan, transaction cost and feasibility of one rebalance.

use uncertain_rebalance::model::derive_plan;
use uncertain_rebalance::presets::small_instance;
use uncertain_rebalance::{PortfolioWeights, RebalanceProblem};

fn main() -> uncertain_rebalance::Result<()> {
    let inst = small_instance();
    let problem = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before.clone(), 9999)?;
    println!("exposure fraction {:.4}", problem.exposure());

    // sell 0.005 of stock 1 and put the proceeds, net of cost, into stock 2
    let sell = 0.005;
    let mut after = inst.before.as_slice().to_vec();
    after[1] -= sell;
    let fee_sell = problem.specs[1].sell_cost;
    let fee_buy = problem.specs[2].buy_cost;
    after[2] += (sell - fee_sell * sell) / (1.0 + fee_buy);
    let after = PortfolioWeights::new(after)?;

    let plan = derive_plan(&inst.before, &after, &problem.specs)?;
    println!("buys  {:?}", plan.buys);
    println!("sells {:?}", plan.sells);
    println!("cost  {:.6e}", plan.total_cost);
    println!(
        "net return {:.6e}, risk {:.6e}",
        problem.net_return(after.as_slice()),
        problem.risk(after.as_slice())
    );
    println!("{}", problem.check(&after)?);
    Ok(())
}
