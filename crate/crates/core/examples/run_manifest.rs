//! Runs a CLI subcommand, then replays it from its manifest and compares digests.

use uncertain_rebalance::cli::{replay, run_cli};
use uncertain_rebalance::io::{RunManifest, MANIFEST_FILE};

fn main() -> uncertain_rebalance::Result<()> {
    let out = std::env::temp_dir().join(format!("urebal-manifest-{}", std::process::id()));
    let out_s = out.to_string_lossy().into_owned();
    let status = run_cli([
        "urebal",
        "gen-market",
        "--regime",
        "bull",
        "--days",
        "30",
        "--seed",
        "9",
        "--out",
        &out_s,
    ]);
    assert_eq!(status, 0);

    let manifest = RunManifest::load(out.join(MANIFEST_FILE))?;
    for (name, digest) in &manifest.outputs {
        println!("{name}: {digest}");
    }
    let changed = replay(&out.join(MANIFEST_FILE))?;
    println!("replay changed {} files", changed.len());
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
