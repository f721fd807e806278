//! Rolling rebalancing simulation of CPPI against buy-and-hold.
//!
//! Wealth accounting per period `t`, with `x` the post-trade weights as
//! fractions of the pre-trade wealth and `cost` the currency paid for trading:
//!
//! ```text
//! W[t+1] = W[t] * (1 + sum_i x[i] * r[i][t]) - cost[t]
//! ```

use std::sync::Arc;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::point_seed;
use crate::ga::{evolve, GaParams};
use crate::model::{validate_specs, AssetSpec, MarketState, ModelConfig, PortfolioWeights, RebalanceProblem};
use crate::uncertainty::{MomentKernel, QuantileGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    /// One row per date, `n + 1` simple returns, asset 0 first.
    pub returns: Vec<Vec<f64>>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { dates, returns };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        Error::check_len(self.dates.len(), self.returns.len())?;
        if self.returns.is_empty() {
            return Err(Error::param("price series is empty"));
        }
        if self.dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("dates must be strictly increasing"));
        }
        let width = self.returns[0].len();
        if width < 2 {
            return Err(Error::param(
                "series needs the risk-free asset and at least one risky asset",
            ));
        }
        let rf = self.returns[0][0];
        for (t, row) in self.returns.iter().enumerate() {
            Error::check_len(width, row.len())?;
            if row[0] != rf {
                return Err(Error::param(format!("risk-free return changes at row {t}")));
            }
            if let Some(r) = row[1..].iter().find(|r| !(**r > -1.0)) {
                return Err(Error::param(format!("risky return {r} at row {t} is not above -1")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.returns[0].len()
    }

    pub fn risk_free_rate(&self) -> f64 {
        self.returns[0][0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Flat,
    Bear,
    Bull,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(Regime::Flat),
            "bear" => Ok(Regime::Bear),
            "bull" => Ok(Regime::Bull),
            other => Err(Error::param(format!("unknown regime {other:?} (flat, bear, bull)"))),
        }
    }
}

/// Flat drifts must stay within this band around zero.
pub const FLAT_DRIFT_BAND: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticMarketSpec {
    pub regime: Regime,
    pub daily_drift: f64,
    pub daily_vol: f64,
    /// No single-period risky return falls below `-max_daily_loss`.
    pub max_daily_loss: f64,
    pub days: usize,
    /// Number of risky assets.
    pub assets: usize,
    pub risk_free_rate: f64,
    pub start: NaiveDate,
}

impl SyntheticMarketSpec {
    /// Drift of 0, -0.5% or +0.5% per day, 1% daily spread, losses bounded at 15%.
    pub fn preset(regime: Regime, days: usize, assets: usize) -> Self {
        let daily_drift = match regime {
            Regime::Flat => 0.0,
            Regime::Bear => -0.005,
            Regime::Bull => 0.005,
        };
        Self {
            regime,
            daily_drift,
            daily_vol: 0.01,
            max_daily_loss: 0.15,
            days,
            assets,
            risk_free_rate: crate::presets::BOND_RATE,
            start: NaiveDate::from_ymd_opt(2015, 3, 21).expect("valid date"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_daily_loss > 0.0 && self.max_daily_loss < 1.0) {
            return Err(Error::param(format!(
                "max_daily_loss must lie in (0, 1), got {}",
                self.max_daily_loss
            )));
        }
        if !(self.daily_vol >= 0.0) {
            return Err(Error::param("daily_vol must be nonnegative"));
        }
        let ok = match self.regime {
            Regime::Flat => self.daily_drift.abs() <= FLAT_DRIFT_BAND,
            Regime::Bear => self.daily_drift < 0.0,
            Regime::Bull => self.daily_drift > 0.0,
        };
        if !ok {
            return Err(Error::param(format!(
                "drift {} does not match the {:?} regime",
                self.daily_drift, self.regime
            )));
        }
        if self.max_daily_loss + self.daily_drift <= 0.0 {
            return Err(Error::param("drift alone breaches max_daily_loss"));
        }
        if self.days == 0 || self.assets == 0 {
            return Err(Error::param("days and assets must be positive"));
        }
        Ok(())
    }
}

/// Draws `drift + vol * z` per asset and day, with `z` a standard normal
/// truncated symmetrically so that no return falls below `-max_daily_loss`.
pub fn generate_market(spec: &SyntheticMarketSpec, seed: u64) -> Result<PriceSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = spec.max_daily_loss + spec.daily_drift;
    let mut dates = Vec::with_capacity(spec.days);
    let mut returns = Vec::with_capacity(spec.days);
    for t in 0..spec.days {
        dates.push(
            spec.start
                .checked_add_days(Days::new(t as u64))
                .ok_or_else(|| Error::param("date overflow"))?,
        );
        let mut row = Vec::with_capacity(spec.assets + 1);
        row.push(spec.risk_free_rate);
        for _ in 0..spec.assets {
            let shock = if spec.daily_vol == 0.0 {
                0.0
            } else {
                loop {
                    let z: f64 = rng.sample(StandardNormal);
                    let s = spec.daily_vol * z;
                    if s.abs() <= bound {
                        break s;
                    }
                }
            };
            row.push(spec.daily_drift + shock);
        }
        returns.push(row);
    }
    PriceSeries::new(dates, returns)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    Cppi { multiplier: f64, floor: f64 },
    BuyAndHold { initial_exposure: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    /// Periods between rebalances; 0 trades only at the first date.
    pub rebalance_every: usize,
}

impl StrategySpec {
    /// Daily CPPI.
    pub fn cppi(multiplier: f64, floor: f64) -> Self {
        Self {
            kind: StrategyKind::Cppi { multiplier, floor },
            rebalance_every: 1,
        }
    }

    /// Allocate once, then hold.
    pub fn buy_and_hold(initial_exposure: f64) -> Self {
        Self {
            kind: StrategyKind::BuyAndHold { initial_exposure },
            rebalance_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            StrategyKind::Cppi { multiplier, floor } => {
                if !(multiplier > 1.0) {
                    return Err(Error::param(format!("CPPI multiplier must exceed 1, got {multiplier}")));
                }
                if !(floor >= 0.0) {
                    return Err(Error::param("CPPI floor must be nonnegative"));
                }
            }
            StrategyKind::BuyAndHold { initial_exposure } => {
                if !(0.0..=1.0).contains(&initial_exposure) {
                    return Err(Error::param(format!(
                        "initial exposure must lie in [0, 1], got {initial_exposure}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            StrategyKind::Cppi { .. } => "cppi",
            StrategyKind::BuyAndHold { .. } => "buy_and_hold",
        }
    }

    fn rebalances_at(&self, t: usize) -> bool {
        t == 0 || (self.rebalance_every > 0 && t.is_multiple_of(self.rebalance_every))
    }
}

/// Return beliefs and frictions used when re-solving at each rebalance.
#[derive(Debug, Clone)]
pub struct BacktestModel {
    pub specs: Vec<AssetSpec>,
    pub config: ModelConfig,
    pub initial_wealth: f64,
    /// Holdings before the first trade.
    pub initial_weights: PortfolioWeights,
    kernel: Arc<MomentKernel>,
}

impl BacktestModel {
    /// Starts fully invested in the risk-free asset.
    pub fn new(specs: Vec<AssetSpec>, config: ModelConfig, initial_wealth: f64, levels: usize) -> Result<Self> {
        validate_specs(&specs)?;
        config.validate()?;
        if !(initial_wealth > 0.0) {
            return Err(Error::param("initial wealth must be positive"));
        }
        let dists: Vec<_> = specs.iter().map(|s| s.dist).collect();
        let kernel = Arc::new(MomentKernel::from_grid(&QuantileGrid::build(&dists, levels)?));
        let initial_weights = PortfolioWeights::all_risk_free(specs.len() - 1);
        Ok(Self {
            specs,
            config,
            initial_wealth,
            initial_weights,
            kernel,
        })
    }

    /// Same beliefs with every transaction cost set to zero.
    pub fn without_costs(&self) -> Self {
        let mut m = self.clone();
        for s in &mut m.specs {
            s.buy_cost = 0.0;
            s.sell_cost = 0.0;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthRecord {
    pub date: NaiveDate,
    /// Wealth before trading on this date.
    pub wealth_start: f64,
    /// Post-trade weights as fractions of `wealth_start`.
    pub weights: Vec<f64>,
    /// Currency paid for trading on this date.
    pub cost: f64,
    pub cumulative_cost: f64,
    /// Wealth at the end of the period.
    pub wealth: f64,
    /// Risky exposure targeted when a rebalance happened on this date.
    pub exposure: Option<f64>,
    /// The chosen portfolio missed the minimum return.
    pub penalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthPath {
    pub label: String,
    pub initial_wealth: f64,
    pub records: Vec<WealthRecord>,
    /// Wealth hit zero and the path was truncated.
    pub ruined: bool,
}

impl WealthPath {
    pub fn terminal_wealth(&self) -> f64 {
        self.records.last().map_or(self.initial_wealth, |r| r.wealth)
    }

    /// Lowest wealth including the starting value.
    pub fn min_wealth(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.wealth)
            .fold(self.initial_wealth, f64::min)
    }

    pub fn total_cost(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_cost)
    }

    /// Largest peak-to-trough loss as a fraction of the peak.
    pub fn max_drawdown(&self) -> f64 {
        let mut peak = self.initial_wealth;
        let mut worst: f64 = 0.0;
        for r in &self.records {
            peak = peak.max(r.wealth);
            worst = worst.max((peak - r.wealth) / peak);
        }
        worst
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.records.iter().map(|r| r.date).collect()
    }
}

/// Runs one strategy over the series, re-solving the rebalancing model with
/// the genetic algorithm on each rebalance date.
pub fn simulate(
    strategy: &StrategySpec,
    series: &PriceSeries,
    model: &BacktestModel,
    ga: &GaParams,
) -> Result<WealthPath> {
    strategy.validate()?;
    series.validate()?;
    Error::check_len(model.specs.len(), series.n_assets())?;

    let mut wealth = model.initial_wealth;
    let mut held = model.initial_weights.as_slice().to_vec();
    let mut cumulative = 0.0;
    let mut records = Vec::with_capacity(series.len());
    let mut ruined = false;

    for (t, (date, returns)) in series.dates.iter().zip(&series.returns).enumerate() {
        let mut weights = held.clone();
        let mut cost = 0.0;
        let mut exposure = None;
        let mut penalized = false;

        if strategy.rebalances_at(t) {
            let (market, config) = match strategy.kind {
                StrategyKind::Cppi { multiplier, floor } => (
                    MarketState::new(wealth, floor, multiplier)?,
                    ModelConfig {
                        exposure_override: None,
                        ..model.config
                    },
                ),
                StrategyKind::BuyAndHold { initial_exposure } => (
                    MarketState::new(wealth, 0.0, 2.0)?,
                    ModelConfig {
                        exposure_override: Some(initial_exposure),
                        ..model.config
                    },
                ),
            };
            let before = PortfolioWeights::new(held.iter().map(|w| w.max(0.0)).collect())?;
            let problem =
                RebalanceProblem::with_kernel(model.specs.clone(), config, market, before, Arc::clone(&model.kernel))?;
            let params = ga.clone().with_seed(point_seed(ga.seed, t));
            let result = evolve(&params, &problem)?;
            let chosen = match result.best_feasible {
                Some(s) => s,
                None => {
                    penalized = true;
                    result.best
                }
            };
            weights = chosen.weights.into_inner();
            cost = problem.cost(&weights) * wealth;
            exposure = Some(problem.exposure());
        }

        let growth: f64 = weights.iter().zip(returns).map(|(w, r)| w * r).sum();
        let end = wealth * (1.0 + growth) - cost;
        cumulative += cost;
        records.push(WealthRecord {
            date: *date,
            wealth_start: wealth,
            weights: weights.clone(),
            cost,
            cumulative_cost: cumulative,
            wealth: end,
            exposure,
            penalized,
        });
        if !(end > 0.0) {
            ruined = true;
            break;
        }
        held = weights
            .iter()
            .zip(returns)
            .map(|(w, r)| wealth * w * (1.0 + r) / end)
            .collect();
        wealth = end;
    }

    Ok(WealthPath {
        label: strategy.label().to_string(),
        initial_wealth: model.initial_wealth,
        records,
        ruined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub terminal_wealth: f64,
    pub min_wealth: f64,
    pub total_cost: f64,
    pub max_drawdown: f64,
}

/// One summary row per path; all paths must cover the same dates.
pub fn compare(paths: &[WealthPath]) -> Result<Vec<SummaryRow>> {
    if let Some(first) = paths.first() {
        let dates = first.dates();
        for p in &paths[1..] {
            if p.dates() != dates {
                return Err(Error::MismatchedDates(format!("{} vs {}", first.label, p.label)));
            }
        }
    }
    Ok(paths
        .iter()
        .map(|p| SummaryRow {
            label: p.label.clone(),
            terminal_wealth: p.terminal_wealth(),
            min_wealth: p.min_wealth(),
            total_cost: p.total_cost(),
            max_drawdown: p.max_drawdown(),
        })
        .collect())
}
