//! Writes a belief level to the asset CSV format and reads it back.

use uncertain_rebalance::io::{load_assets, save_assets};
use uncertain_rebalance::presets::level_assets;

fn main() -> uncertain_rebalance::Result<()> {
    let specs = level_assets(4, 10)?;
    let path = std::env::temp_dir().join(format!("urebal-assets-{}.csv", std::process::id()));
    save_assets(&path, &specs)?;
    print!("{}", std::fs::read_to_string(&path)?);
    let back = load_assets(&path)?;
    println!("round trip identical: {}", back == specs);
    std::fs::remove_file(&path)?;
    Ok(())
}
