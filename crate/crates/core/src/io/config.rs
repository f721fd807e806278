//! TOML run configuration with sections `model`, `ga`, `frontier` and
//! `backtest`. Missing keys take the documented defaults; unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backtest::Regime;
use crate::error::{Error, Result};
use crate::ga::GaParams;
use crate::model::{MarketState, ModelConfig};
use crate::presets::BOND_RATE;
use crate::uncertainty::DEFAULT_LEVELS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Maximum number of risky assets held.
    pub h: usize,
    pub r_f: f64,
    /// CPPI multiplier.
    pub m: f64,
    pub w0: f64,
    pub floor: f64,
    /// Quantile levels of the moment grid.
    pub k: usize,
    /// Pre-rebalance weights, asset 0 first; all risk-free when absent.
    pub before: Option<Vec<f64>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            h: 10,
            r_f: BOND_RATE,
            m: 3.0,
            w0: 100_000.0,
            floor: 70_000.0,
            k: DEFAULT_LEVELS,
            before: None,
        }
    }
}

impl ModelSection {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            max_assets: self.h,
            risk_free_rate: self.r_f,
            min_return: self.r_f,
            ..ModelConfig::default()
        }
    }

    pub fn market(&self) -> Result<MarketState> {
        MarketState::new(self.w0, self.floor, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ga,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierSection {
    pub points: usize,
    pub solver: SolverKind,
    pub oracle_step: f64,
}

impl Default for FrontierSection {
    fn default() -> Self {
        Self {
            points: crate::frontier::DEFAULT_POINTS,
            solver: SolverKind::Ga,
            oracle_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    Cppi,
    BuyAndHold,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    pub strategy: StrategyChoice,
    pub regime: Regime,
    pub days: usize,
    /// Overrides of the regime preset.
    pub daily_drift: Option<f64>,
    pub daily_vol: Option<f64>,
    pub max_daily_loss: Option<f64>,
    /// Periods between CPPI rebalances.
    pub rebalance_every: usize,
    /// Buy-and-hold risky share; `1 - floor / w0` when absent.
    pub initial_exposure: Option<f64>,
    pub zero_costs: bool,
}

impl Default for BacktestSection {
    fn default() -> Self {
        Self {
            strategy: StrategyChoice::Both,
            regime: Regime::Bear,
            days: 60,
            daily_drift: None,
            daily_vol: None,
            max_daily_loss: None,
            rebalance_every: 1,
            initial_exposure: None,
            zero_costs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; generated and recorded in the manifest when absent.
    pub seed: Option<u64>,
    pub model: ModelSection,
    pub ga: GaParams,
    pub frontier: FrontierSection,
    pub backtest: BacktestSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.model
            .model_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.model.market().map_err(|e| Error::Config(e.to_string()))?;
        if self.frontier.points < 2 {
            return Err(Error::Config("frontier.points must be at least 2".into()));
        }
        if self.backtest.days == 0 {
            return Err(Error::Config("backtest.days must be positive".into()));
        }
        Ok(())
    }

    /// Fits the configuration to a universe of `n_risky` assets, returning warnings.
    pub fn fit_to(&mut self, n_risky: usize) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.model.h > n_risky {
            warnings.push(format!(
                "model.h = {} exceeds the {n_risky} risky assets; clamped to {n_risky}",
                self.model.h
            ));
            self.model.h = n_risky;
        }
        warnings
    }

    /// Fixes the seed, drawing one from the OS when none was given.
    pub fn resolve_seed(&mut self) -> u64 {
        let seed = *self.seed.get_or_insert_with(rand::random);
        self.ga.seed = seed;
        seed
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
