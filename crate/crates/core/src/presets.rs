//! Expert-estimated return distributions for ten stocks at six belief-degree
//! levels, plus fixtures built from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AssetSpec, MarketState, ModelConfig, PortfolioWeights};
use crate::uncertainty::UncertainDistribution;

/// Risk-free return per period.
pub const BOND_RATE: f64 = 0.00056;

/// Expected return of stocks 1 to 10 (identical at every level).
pub const STOCK_MEANS: [f64; 10] = [
    0.00045, 0.00104, 0.00078, 0.00075, 0.00045, 0.06113, 0.00148, 0.00021, -0.00025, -0.00173,
];

/// Spread of stocks 1 to 10 at belief levels 1 to 6.
pub const STOCK_SIGMAS: [[f64; 10]; 6] = [
    [
        0.02776, 0.01516, 0.01914, 0.02502, 0.01608, 1.01373, 0.02443, 0.0188, 0.01858, 0.01285,
    ],
    [
        0.03053, 0.01668, 0.02105, 0.02752, 0.01769, 1.11511, 0.02688, 0.02068, 0.02044, 0.01413,
    ],
    [
        0.03331, 0.01819, 0.02297, 0.03003, 0.0193, 1.21648, 0.02932, 0.02256, 0.0223, 0.01542,
    ],
    [
        0.03803, 0.02077, 0.02622, 0.03428, 0.02203, 1.38882, 0.03347, 0.02576, 0.02546, 0.0176,
    ],
    [
        0.03969, 0.02168, 0.02737, 0.03578, 0.023, 1.44964, 0.03494, 0.02689, 0.02657, 0.01837,
    ],
    [
        0.04497, 0.02456, 0.031, 0.04054, 0.02605, 1.64225, 0.03958, 0.03046, 0.0301, 0.02081,
    ],
];

pub const LEVELS: usize = 6;

/// Return distributions of the bond and the ten stocks at `level` (1 to 6).
pub fn level_distributions(level: usize) -> Result<Vec<UncertainDistribution>> {
    if !(1..=LEVELS).contains(&level) {
        return Err(Error::param(format!("belief level must be 1..={LEVELS}, got {level}")));
    }
    let sigmas = &STOCK_SIGMAS[level - 1];
    let mut out = vec![UncertainDistribution::Constant { c: BOND_RATE }];
    out.extend(
        STOCK_MEANS
            .iter()
            .zip(sigmas)
            .map(|(&e, &sigma)| UncertainDistribution::Normal { e, sigma }),
    );
    Ok(out)
}

/// Bond plus the first `n` stocks at `level`, with default fees and bounds `[0, 1]`.
pub fn level_assets(level: usize, n: usize) -> Result<Vec<AssetSpec>> {
    let dists = level_distributions(level)?;
    if n == 0 || n > 10 {
        return Err(Error::param(format!("level fixtures hold 1..=10 stocks, got {n}")));
    }
    let mut specs = vec![AssetSpec::bond(BOND_RATE)];
    specs.extend(
        dists[1..=n]
            .iter()
            .enumerate()
            .map(|(i, &d)| AssetSpec::stock(i + 1, d)),
    );
    Ok(specs)
}

/// Level-1 stocks followed by `extra` seeded synthetic normal stocks.
pub fn extended_universe(extra: usize, seed: u64) -> Vec<AssetSpec> {
    let mut specs = level_assets(1, 10).expect("level 1 exists");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..extra {
        let e = rng.random_range(-0.002..0.003);
        let sigma = rng.random_range(0.012..0.045);
        specs.push(AssetSpec::stock(11 + i, UncertainDistribution::Normal { e, sigma }));
    }
    specs
}

/// Wealth 100 000 and floor 70 000 with multiplier `m`.
pub fn standard_market(multiplier: f64) -> MarketState {
    MarketState {
        wealth: 100_000.0,
        floor: 70_000.0,
        multiplier,
    }
}

/// The four-stock instance used for solver comparisons: level-1 stocks 1 to 4,
/// at most three held, multiplier 3, currently holding 0.3 of stocks 1 to 3.
pub struct SmallInstance {
    pub specs: Vec<AssetSpec>,
    pub config: ModelConfig,
    pub market: MarketState,
    pub before: PortfolioWeights,
}

pub fn small_instance() -> SmallInstance {
    SmallInstance {
        specs: level_assets(1, 4).expect("level 1 exists"),
        config: ModelConfig {
            max_assets: 3,
            ..ModelConfig::default()
        },
        market: standard_market(3.0),
        before: PortfolioWeights::new(vec![0.1, 0.3, 0.3, 0.3, 0.0]).expect("nonnegative"),
    }
}
