//! The rebalancing decision problem: assets, costs, CPPI exposure, and the
//! evaluation of every objective and constraint.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uncertainty::{MomentKernel, Moments, QuantileGrid, UncertainDistribution};

/// Absolute tolerance applied to every constraint check.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Proportional commission and fee totals for stocks and bonds.
pub mod fees {
    pub const STOCK_BUY: f64 = 0.00486;
    pub const STOCK_SELL: f64 = 0.01029;
    pub const BOND_BUY: f64 = 0.000726;
    pub const BOND_SELL: f64 = 0.000774;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSpec {
    /// Asset id; 0 is the risk-free asset.
    pub index: usize,
    pub dist: UncertainDistribution,
    /// Cost per unit of wealth bought.
    pub buy_cost: f64,
    /// Cost per unit of wealth sold.
    pub sell_cost: f64,
    pub lower: f64,
    pub upper: f64,
}

impl AssetSpec {
    /// Risky asset with stock fees and bounds `[0, 1]`.
    pub fn stock(index: usize, dist: UncertainDistribution) -> Self {
        Self {
            index,
            dist,
            buy_cost: fees::STOCK_BUY,
            sell_cost: fees::STOCK_SELL,
            lower: 0.0,
            upper: 1.0,
        }
    }

    /// Risk-free asset with bond fees.
    pub fn bond(rate: f64) -> Self {
        Self {
            index: 0,
            dist: UncertainDistribution::Constant { c: rate },
            buy_cost: fees::BOND_BUY,
            sell_cost: fees::BOND_SELL,
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn with_costs(mut self, buy: f64, sell: f64) -> Self {
        self.buy_cost = buy;
        self.sell_cost = sell;
        self
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        if !(self.buy_cost >= 0.0 && self.sell_cost >= 0.0) {
            return Err(Error::param(format!(
                "asset {}: costs must be nonnegative (buy {}, sell {})",
                self.index, self.buy_cost, self.sell_cost
            )));
        }
        if !(0.0 <= self.lower && self.lower <= self.upper && self.upper <= 1.0) {
            return Err(Error::param(format!(
                "asset {}: bounds must satisfy 0 <= lower <= upper <= 1 (lower {}, upper {})",
                self.index, self.lower, self.upper
            )));
        }
        Ok(())
    }
}

/// Checks that `specs` are valid and indexed `0..=n` in order.
pub fn validate_specs(specs: &[AssetSpec]) -> Result<()> {
    if specs.len() < 2 {
        return Err(Error::param("need the risk-free asset and at least one risky asset"));
    }
    for (pos, s) in specs.iter().enumerate() {
        if s.index != pos {
            return Err(Error::param(format!("asset at position {pos} has index {}", s.index)));
        }
        s.validate()?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub wealth: f64,
    pub floor: f64,
    pub multiplier: f64,
}

impl MarketState {
    pub fn new(wealth: f64, floor: f64, multiplier: f64) -> Result<Self> {
        let m = Self {
            wealth,
            floor,
            multiplier,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wealth > 0.0) {
            return Err(Error::param(format!("wealth must be positive, got {}", self.wealth)));
        }
        if !(self.floor >= 0.0) {
            return Err(Error::param(format!("floor must be nonnegative, got {}", self.floor)));
        }
        if !(self.multiplier > 1.0) {
            return Err(Error::param(format!(
                "multiplier must exceed 1, got {}",
                self.multiplier
            )));
        }
        Ok(())
    }

    pub fn cushion(&self) -> f64 {
        self.wealth - self.floor
    }
}

/// Fraction of wealth the CPPI rule allocates to risky assets.
pub fn exposure_fraction(market: &MarketState) -> f64 {
    if market.wealth <= market.floor {
        return 0.0;
    }
    (market.multiplier * (1.0 - market.floor / market.wealth)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Maximum number of risky assets held.
    pub max_assets: usize,
    pub risk_free_rate: f64,
    /// Minimum net expected return (the frontier parameter).
    pub min_return: f64,
    /// Fixed exposure replacing the CPPI rule (buy-and-hold).
    pub exposure_override: Option<f64>,
    /// Include the risk-free asset in the return constraint's expected value.
    /// `false` restricts that sum to the risky assets only.
    pub return_includes_risk_free: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            max_assets: 10,
            risk_free_rate: 0.00056,
            min_return: 0.00056,
            exposure_override: None,
            return_includes_risk_free: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_assets < 1 {
            return Err(Error::param("max_assets must be at least 1"));
        }
        if !self.risk_free_rate.is_finite() || !self.min_return.is_finite() {
            return Err(Error::param("rates must be finite"));
        }
        if self.min_return < self.risk_free_rate {
            return Err(Error::param(format!(
                "minimum return {} is below the risk-free rate {}",
                self.min_return, self.risk_free_rate
            )));
        }
        if let Some(e) = self.exposure_override {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::param(format!("exposure override must lie in [0, 1], got {e}")));
            }
        }
        Ok(())
    }

    pub fn exposure(&self, market: &MarketState) -> f64 {
        self.exposure_override.unwrap_or_else(|| exposure_fraction(market))
    }
}

/// Fractions of wealth per asset; position 0 is the risk-free asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioWeights(Vec<f64>);

impl PortfolioWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::domain(format!("weight {i} must be nonnegative, got {w}")));
        }
        Ok(Self(weights))
    }

    /// Everything in the risk-free asset.
    pub fn all_risk_free(n_risky: usize) -> Self {
        let mut w = vec![0.0; n_risky + 1];
        w[0] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn risky(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn held_risky(&self) -> usize {
        self.risky().iter().filter(|&&w| w > 0.0).count()
    }
}

impl std::ops::Index<usize> for PortfolioWeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RebalancePlan {
    pub buys: Vec<f64>,
    pub sells: Vec<f64>,
    /// Fraction of wealth paid in costs.
    pub total_cost: f64,
}

impl RebalancePlan {
    /// Cost total recomputed from the trades.
    pub fn cost_of(&self, specs: &[AssetSpec]) -> f64 {
        self.buys
            .iter()
            .zip(&self.sells)
            .zip(specs)
            .map(|((b, s), spec)| spec.buy_cost * b + spec.sell_cost * s)
            .sum()
    }
}

pub fn derive_plan(before: &PortfolioWeights, after: &PortfolioWeights, specs: &[AssetSpec]) -> Result<RebalancePlan> {
    Error::check_len(before.len(), after.len())?;
    Error::check_len(before.len(), specs.len())?;
    let buys: Vec<f64> = after.0.iter().zip(&before.0).map(|(a, b)| (a - b).max(0.0)).collect();
    let sells: Vec<f64> = after.0.iter().zip(&before.0).map(|(a, b)| (b - a).max(0.0)).collect();
    let mut plan = RebalancePlan {
        buys,
        sells,
        total_cost: 0.0,
    };
    plan.total_cost = plan.cost_of(specs);
    Ok(plan)
}

/// Transaction cost of moving from `before` to `after` without building a plan.
pub(crate) fn trade_cost(before: &[f64], after: &[f64], specs: &[AssetSpec]) -> f64 {
    after
        .iter()
        .zip(before)
        .zip(specs)
        .map(|((a, b), s)| {
            let d = a - b;
            if d > 0.0 {
                s.buy_cost * d
            } else {
                -s.sell_cost * d
            }
        })
        .sum()
}

/// Anything that can score a weight vector against the uncertain returns.
pub trait MomentSource {
    fn moments(&self, weights: &[f64]) -> Result<Moments>;
    fn len_assets(&self) -> usize;
}

impl MomentSource for QuantileGrid {
    fn moments(&self, weights: &[f64]) -> Result<Moments> {
        self.portfolio_moments(weights)
    }
    fn len_assets(&self) -> usize {
        QuantileGrid::len_assets(self)
    }
}

impl MomentSource for MomentKernel {
    fn moments(&self, weights: &[f64]) -> Result<Moments> {
        MomentKernel::moments(self, weights)
    }
    fn len_assets(&self) -> usize {
        MomentKernel::len_assets(self)
    }
}

/// Expected return net of transaction costs.
pub fn objective_return<S: MomentSource + ?Sized>(
    source: &S,
    x: &PortfolioWeights,
    plan: &RebalancePlan,
) -> Result<f64> {
    Ok(source.moments(x.as_slice())?.expected - plan.total_cost)
}

/// Variance of the portfolio's uncertain return.
pub fn objective_risk<S: MomentSource + ?Sized>(source: &S, x: &PortfolioWeights) -> Result<f64> {
    Ok(source.moments(x.as_slice())?.variance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    Dimension,
    Rebalancing,
    Complementarity,
    PlanCost,
    CapitalBudget,
    RiskFreeWeight,
    Cardinality,
    UpperBound,
    LowerBound,
    Nonnegativity,
    MinReturn,
    ReturnAboveRiskFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub asset: Option<usize>,
    /// Signed residual of the violated constraint.
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.asset {
            Some(i) => write!(f, "{:?}[{}]: {:+e}", self.constraint, i, self.magnitude),
            None => write!(f, "{:?}: {:+e}", self.constraint, self.magnitude),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }

    pub fn ignoring(mut self, skip: &[Constraint]) -> Self {
        self.violations.retain(|v| !skip.contains(&v.constraint));
        self
    }

    fn push(&mut self, constraint: Constraint, asset: Option<usize>, magnitude: f64) {
        self.violations.push(Violation {
            constraint,
            asset,
            magnitude,
        });
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "feasible");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Evaluates every constraint of the epsilon-constrained model.
#[allow(clippy::too_many_arguments)]
pub fn check_feasible<S: MomentSource + ?Sized>(
    before: &PortfolioWeights,
    after: &PortfolioWeights,
    plan: &RebalancePlan,
    specs: &[AssetSpec],
    config: &ModelConfig,
    market: &MarketState,
    source: &S,
) -> FeasibilityReport {
    let tol = FEASIBILITY_TOL;
    let mut report = FeasibilityReport::default();
    let n1 = specs.len();
    for len in [
        before.len(),
        after.len(),
        plan.buys.len(),
        plan.sells.len(),
        source.len_assets(),
    ] {
        if len != n1 {
            report.push(Constraint::Dimension, None, len as f64 - n1 as f64);
            return report;
        }
    }
    let x = after.as_slice();
    let x0 = before.as_slice();

    for i in 0..n1 {
        let r = x0[i] + plan.buys[i] - plan.sells[i] - x[i];
        if r.abs() > tol {
            report.push(Constraint::Rebalancing, Some(i), r);
        }
        let both = plan.buys[i].min(plan.sells[i]);
        if both > tol {
            report.push(Constraint::Complementarity, Some(i), both);
        }
        for (v, constraint) in [
            (x[i], Constraint::Nonnegativity),
            (plan.buys[i], Constraint::Nonnegativity),
            (plan.sells[i], Constraint::Nonnegativity),
        ] {
            if v < -tol {
                report.push(constraint, Some(i), v);
            }
        }
        let held = if x[i] > 0.0 { 1.0 } else { 0.0 };
        let over = x[i] - specs[i].upper * held;
        if over > tol {
            report.push(Constraint::UpperBound, Some(i), over);
        }
        let under = specs[i].lower * held - x[i];
        if under > tol {
            report.push(Constraint::LowerBound, Some(i), under);
        }
    }

    let cost = plan.cost_of(specs);
    if (cost - plan.total_cost).abs() > tol {
        report.push(Constraint::PlanCost, None, plan.total_cost - cost);
    }

    let exposure = config.exposure(market);
    let risky: f64 = x[1..].iter().sum();
    let budget = risky + plan.total_cost - exposure;
    if budget.abs() > tol {
        report.push(Constraint::CapitalBudget, None, budget);
    }
    let rf = x[0] - (1.0 - exposure);
    if rf.abs() > tol {
        report.push(Constraint::RiskFreeWeight, None, rf);
    }

    let held = after.held_risky();
    if held > config.max_assets {
        report.push(Constraint::Cardinality, None, (held - config.max_assets) as f64);
    }

    match source.moments(x) {
        Ok(m) => {
            let e = if config.return_includes_risk_free {
                m.expected
            } else {
                m.expected - x[0] * source_mean_of_risk_free(specs)
            };
            let shortfall = config.min_return - (e - plan.total_cost);
            if shortfall > tol {
                report.push(Constraint::MinReturn, None, shortfall);
            }
        }
        Err(_) => report.push(Constraint::Nonnegativity, None, f64::NAN),
    }
    if config.risk_free_rate - config.min_return > tol {
        report.push(
            Constraint::ReturnAboveRiskFree,
            None,
            config.risk_free_rate - config.min_return,
        );
    }
    report
}

fn source_mean_of_risk_free(specs: &[AssetSpec]) -> f64 {
    specs[0].dist.expected_value()
}

/// Everything needed to evaluate one rebalancing decision.
#[derive(Debug, Clone)]
pub struct RebalanceProblem {
    pub specs: Vec<AssetSpec>,
    pub config: ModelConfig,
    pub market: MarketState,
    pub before: PortfolioWeights,
    kernel: Arc<MomentKernel>,
}

impl RebalanceProblem {
    /// Builds the grid with `levels` quantile levels and validates every input.
    pub fn new(
        specs: Vec<AssetSpec>,
        config: ModelConfig,
        market: MarketState,
        before: PortfolioWeights,
        levels: usize,
    ) -> Result<Self> {
        validate_specs(&specs)?;
        let dists: Vec<_> = specs.iter().map(|s| s.dist).collect();
        let grid = QuantileGrid::build(&dists, levels)?;
        let kernel = Arc::new(MomentKernel::from_grid(&grid));
        Self::with_kernel(specs, config, market, before, kernel)
    }

    /// Reuses a kernel built for the same asset list.
    pub fn with_kernel(
        specs: Vec<AssetSpec>,
        config: ModelConfig,
        market: MarketState,
        before: PortfolioWeights,
        kernel: Arc<MomentKernel>,
    ) -> Result<Self> {
        validate_specs(&specs)?;
        config.validate()?;
        market.validate()?;
        Error::check_len(specs.len(), before.len())?;
        Error::check_len(specs.len(), kernel.len_assets())?;
        Ok(Self {
            specs,
            config,
            market,
            before,
            kernel,
        })
    }

    pub fn kernel(&self) -> &Arc<MomentKernel> {
        &self.kernel
    }

    pub fn n_risky(&self) -> usize {
        self.specs.len() - 1
    }

    pub fn exposure(&self) -> f64 {
        self.config.exposure(&self.market)
    }

    /// Cardinality limit clamped to the number of risky assets.
    pub fn max_assets(&self) -> usize {
        self.config.max_assets.min(self.n_risky())
    }

    pub fn with_min_return(&self, lambda: f64) -> Result<Self> {
        let mut p = self.clone();
        p.config.min_return = lambda;
        p.config.validate()?;
        Ok(p)
    }

    pub fn with_before(&self, before: PortfolioWeights) -> Result<Self> {
        Error::check_len(self.specs.len(), before.len())?;
        let mut p = self.clone();
        p.before = before;
        Ok(p)
    }

    pub fn with_market(&self, market: MarketState) -> Result<Self> {
        market.validate()?;
        let mut p = self.clone();
        p.market = market;
        Ok(p)
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        trade_cost(self.before.as_slice(), x, &self.specs)
    }

    /// Expected value entering the return constraint, before costs.
    pub fn constraint_expected(&self, x: &[f64]) -> f64 {
        if self.config.return_includes_risk_free {
            self.kernel.expected(x)
        } else {
            self.kernel.expected_risky(x)
        }
    }

    pub fn net_return(&self, x: &[f64]) -> f64 {
        self.constraint_expected(x) - self.cost(x)
    }

    pub fn risk(&self, x: &[f64]) -> f64 {
        self.kernel.variance(x)
    }

    /// Amount by which the net return falls short of the minimum return.
    pub fn shortfall(&self, x: &[f64]) -> f64 {
        (self.config.min_return - self.net_return(x)).max(0.0)
    }

    pub fn plan_for(&self, x: &PortfolioWeights) -> Result<RebalancePlan> {
        derive_plan(&self.before, x, &self.specs)
    }

    pub fn check(&self, x: &PortfolioWeights) -> Result<FeasibilityReport> {
        let plan = self.plan_for(x)?;
        Ok(check_feasible(
            &self.before,
            x,
            &plan,
            &self.specs,
            &self.config,
            &self.market,
            self.kernel.as_ref(),
        ))
    }
}
