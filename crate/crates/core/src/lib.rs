//! Portfolio rebalancing when asset returns are uncertain variables.
//!
//! The crate models a bi-objective rebalancing problem (maximize expected
//! return net of proportional transaction costs, minimize variance) whose
//! risky exposure follows constant-proportion portfolio insurance. Moments
//! come from a quantile grid of inverse uncertainty distributions, the
//! frontier from an epsilon-constraint scan over the minimum return, and each
//! scan point is solved by a repair-based genetic algorithm or, for small
//! instances, by exhaustive lattice enumeration.
//!
//! | module | contents |
//! |---|---|
//! | [`uncertainty`] | distributions, inverse distributions, quantile grid |
//! | [`model`] | assets, costs, CPPI exposure, objectives, feasibility |
//! | [`ga`] | chromosome repair, penalty fitness, operators, evolution |
//! | [`oracle`] | lattice brute force and RPD |
//! | [`frontier`] | minimum-return grid and frontier scan |
//! | [`backtest`] | synthetic markets, CPPI and buy-and-hold paths |
//! | [`io`] | CSV and config formats, run manifests |
//! | [`cli`] | the `urebal` command line |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod cli;
pub mod error;
pub mod frontier;
pub mod ga;
pub mod io;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod uncertainty;

pub use error::{Error, Result};
pub use model::{AssetSpec, MarketState, ModelConfig, PortfolioWeights, RebalancePlan, RebalanceProblem};
pub use uncertainty::{MomentKernel, QuantileGrid, UncertainDistribution};
