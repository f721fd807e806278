use uncertain_rebalance::backtest::{
    compare, generate_market, simulate, BacktestModel, Regime, StrategySpec, SyntheticMarketSpec, WealthPath,
};
use uncertain_rebalance::ga::GaParams;
use uncertain_rebalance::model::exposure_fraction;
use uncertain_rebalance::presets::level_assets;
use uncertain_rebalance::{MarketState, ModelConfig};

fn model(n: usize) -> BacktestModel {
    BacktestModel::new(level_assets(1, n).unwrap(), ModelConfig::default(), 100_000.0, 999).unwrap()
}

fn quick() -> GaParams {
    GaParams {
        generations: 80,
        stall_window: 30,
        ..GaParams::default().with_seed(3)
    }
}

fn accounting_holds(path: &WealthPath, returns: &[Vec<f64>]) {
    let mut w = path.initial_wealth;
    let mut cum = 0.0;
    for (r, ret) in path.records.iter().zip(returns) {
        assert_eq!(r.wealth_start, w);
        let growth: f64 = r.weights.iter().zip(ret).map(|(x, y)| x * y).sum();
        assert_eq!(r.wealth, w * (1.0 + growth) - r.cost);
        cum += r.cost;
        assert_eq!(r.cumulative_cost, cum);
        w = r.wealth;
    }
}

#[test]
fn accounting_identity_and_recorded_exposure() {
    let series = generate_market(&SyntheticMarketSpec::preset(Regime::Bear, 15, 10), 1).unwrap();
    let m = model(10);
    let path = simulate(&StrategySpec::cppi(4.0, 70_000.0), &series, &m, &quick()).unwrap();
    accounting_holds(&path, &series.returns);
    for r in &path.records {
        let e = exposure_fraction(&MarketState {
            wealth: r.wealth_start,
            floor: 70_000.0,
            multiplier: 4.0,
        });
        assert_eq!(r.exposure, Some(e));
        assert_eq!(r.weights[0], 1.0 - e);
    }
    let hold = simulate(&StrategySpec::buy_and_hold(0.3), &series, &m, &quick()).unwrap();
    accounting_holds(&hold, &series.returns);
    assert_eq!(hold.records.iter().filter(|r| r.cost != 0.0).count(), 1);
    assert!(hold.records[0].cost > 0.0);
}

#[test]
fn frictionless_flat_zero_vol_grows_at_weighted_drift() {
    let mut spec = SyntheticMarketSpec::preset(Regime::Flat, 10, 4);
    spec.daily_vol = 0.0;
    spec.daily_drift = 0.0005;
    let series = generate_market(&spec, 0).unwrap();
    let m = model(4).without_costs();
    let path = simulate(&StrategySpec::cppi(3.0, 70_000.0), &series, &m, &quick()).unwrap();
    for r in &path.records {
        assert_eq!(r.cost, 0.0);
        let drift = r.weights[0] * spec.risk_free_rate + r.weights[1..].iter().sum::<f64>() * 0.0005;
        assert!((r.wealth / r.wealth_start - 1.0 - drift).abs() <= 1e-12);
    }
}

#[test]
fn frictionless_cppi_never_breaches_the_floor() {
    let m = model(10).without_costs();
    for seed in 0..3 {
        let mut spec = SyntheticMarketSpec::preset(Regime::Bear, 40, 10);
        spec.daily_vol = 0.05;
        spec.max_daily_loss = 0.19;
        let series = generate_market(&spec, seed).unwrap();
        let path = simulate(&StrategySpec::cppi(5.0, 70_000.0), &series, &m, &quick()).unwrap();
        assert!(path.min_wealth() >= 70_000.0, "seed {seed}: {}", path.min_wealth());
    }
}

#[test]
fn bear_fixture_loses_money_fully_invested() {
    let series = generate_market(&SyntheticMarketSpec::preset(Regime::Bear, 60, 10), 2015).unwrap();
    let growth: f64 = series
        .returns
        .iter()
        .map(|r| 1.0 + r[1..].iter().sum::<f64>() / 10.0)
        .product();
    assert!(growth < 1.0);
}

#[test]
fn flat_cppi_pays_more_costs_than_hold() {
    let series = generate_market(&SyntheticMarketSpec::preset(Regime::Flat, 20, 10), 4).unwrap();
    let m = model(10);
    let c = simulate(&StrategySpec::cppi(3.0, 70_000.0), &series, &m, &quick()).unwrap();
    let b = simulate(&StrategySpec::buy_and_hold(0.3), &series, &m, &quick()).unwrap();
    let rows = compare(&[c, b]).unwrap();
    assert!(rows[0].total_cost > rows[1].total_cost);
}

#[test]
fn sizes_must_agree() {
    let series = generate_market(&SyntheticMarketSpec::preset(Regime::Bull, 5, 3), 1).unwrap();
    assert!(simulate(&StrategySpec::cppi(3.0, 70_000.0), &series, &model(4), &quick()).is_err());
    assert!(simulate(&StrategySpec::cppi(1.0, 70_000.0), &series, &model(3), &quick()).is_err());
    assert!(simulate(&StrategySpec::buy_and_hold(1.5), &series, &model(3), &quick()).is_err());
}
