//! File formats: asset CSV, run configuration, output tables and manifests.
//!
//! Every float is written with 17 significant digits so that outputs
//! round-trip exactly and compare byte for byte across runs.

mod assets;
mod config;
mod manifest;
mod tables;

pub use assets::{load_assets, parse_assets, save_assets, write_assets, ASSET_HEADER};
pub use config::{load_config, BacktestSection, FrontierSection, ModelSection, RunConfig, SolverKind, StrategyChoice};
pub use manifest::{sha256_file, RunManifest, MANIFEST_FILE};
pub use tables::{
    load_series, parse_series, write_frontier, write_rows, write_series, write_summary, write_wealth_path,
};

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
