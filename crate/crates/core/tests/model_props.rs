use proptest::prelude::*;

use uncertain_rebalance::model::{derive_plan, exposure_fraction, Constraint};
use uncertain_rebalance::presets::{level_assets, small_instance};
use uncertain_rebalance::{MarketState, PortfolioWeights, RebalanceProblem};

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n)
}

proptest! {
    #[test]
    fn plan_reconstructs_exactly(before in weights(5), after in weights(5)) {
        let specs = level_assets(1, 4).unwrap();
        let b = PortfolioWeights::new(before.clone()).unwrap();
        let a = PortfolioWeights::new(after.clone()).unwrap();
        let plan = derive_plan(&b, &a, &specs).unwrap();
        for i in 0..5 {
            // one rounding of the larger operand
            let scale = before[i].max(after[i]);
            prop_assert!((before[i] + plan.buys[i] - plan.sells[i] - after[i]).abs() <= f64::EPSILON * scale);
            prop_assert!(plan.buys[i] == 0.0 || plan.sells[i] == 0.0);
            prop_assert!(plan.buys[i] >= 0.0 && plan.sells[i] >= 0.0);
        }
        prop_assert_eq!(plan.total_cost == 0.0, before == after);
    }

    #[test]
    fn exposure_is_monotone(w in 1.0f64..1e6, f in 0.0f64..1e6, m in 1.01f64..20.0, dw in 0.0f64..1e5, df in 0.0f64..1e5) {
        let e = exposure_fraction(&MarketState { wealth: w, floor: f, multiplier: m });
        prop_assert!((0.0..=1.0).contains(&e));
        let richer = exposure_fraction(&MarketState { wealth: w + dw, floor: f, multiplier: m });
        let higher_floor = exposure_fraction(&MarketState { wealth: w, floor: f + df, multiplier: m });
        prop_assert!(richer >= e);
        prop_assert!(higher_floor <= e);
        if m * (w - f) >= w {
            prop_assert_eq!(e, 1.0);
        }
    }

    #[test]
    fn check_is_pure(after in weights(5)) {
        let inst = small_instance();
        let p = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before, 999).unwrap();
        let x = PortfolioWeights::new(after).unwrap();
        let a = p.check(&x).unwrap();
        let b = p.check(&x).unwrap();
        prop_assert_eq!(a.violations, b.violations);
    }
}

#[test]
fn holding_is_feasible_and_costless() {
    let inst = small_instance();
    let p = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before.clone(), 9999).unwrap();
    assert_eq!(p.cost(inst.before.as_slice()), 0.0);
    assert!(p.check(&inst.before).unwrap().is_feasible());
}

#[test]
fn too_many_holdings_flag_cardinality() {
    let inst = small_instance();
    let p = RebalanceProblem::new(inst.specs, inst.config, inst.market, inst.before.clone(), 999).unwrap();
    let spread = PortfolioWeights::new(vec![0.1, 0.225, 0.225, 0.225, 0.225]).unwrap();
    assert!(p.check(&spread).unwrap().has(Constraint::Cardinality));
}
