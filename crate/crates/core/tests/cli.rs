use std::path::Path;

use uncertain_rebalance::cli::{replay, run_cli};
use uncertain_rebalance::io::{load_assets, load_config, load_series, save_assets, RunManifest, MANIFEST_FILE};
use uncertain_rebalance::presets::level_assets;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["urebal"];
    v.extend_from_slice(args);
    run_cli(v)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_subcommand_and_missing_args_fail() {
    assert_ne!(run(&["bogus"]), 0);
    assert_ne!(run(&[]), 0);
    assert_ne!(run(&["frontier", "--out", "/nonexistent"]), 0);
}

#[test]
fn grid_check_on_level_one_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    assert_eq!(
        run(&[
            "grid-check",
            "--assets",
            &format!("{DATA}/level1.csv"),
            "--out",
            &out,
            "--seed",
            "1"
        ]),
        0
    );
    let report = std::fs::read_to_string(dir.path().join("grid_check.csv")).unwrap();
    assert_eq!(report.lines().count(), 12);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));
    let m = RunManifest::load(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.seed, 1);
    assert!(m.outputs.contains_key("grid_check.csv"));
}

#[test]
fn oracle_compare_reports_rpd() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let cfg = format!("{DATA}/small.toml");
    assert_eq!(
        run(&[
            "oracle-compare",
            "--config",
            &cfg,
            "--points",
            "3",
            "--runs",
            "2",
            "--out",
            &out
        ]),
        0
    );
    let table = std::fs::read_to_string(dir.path().join("oracle_compare.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3 * 2);
    assert!(table.starts_with("lambda,oracle_risk,seed,ga_risk,rpd"));
}

#[test]
fn backtest_writes_paths_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let cfg = format!("{DATA}/bear.toml");
    let assets = format!("{DATA}/level1.csv");
    assert_eq!(
        run(&["backtest", "--assets", &assets, "--config", &cfg, "--days", "5", "--out", &out]),
        0
    );
    for f in [
        "series.csv",
        "wealth_cppi.csv",
        "wealth_buy_and_hold.csv",
        "comparison.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let series = load_series(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.len(), 5);

    // the written series can be fed back in
    let again = tempfile::tempdir().unwrap();
    let series_path = s(&dir.path().join("series.csv"));
    assert_eq!(
        run(&[
            "backtest",
            "--assets",
            &assets,
            "--config",
            &cfg,
            "--series",
            &series_path,
            "--out",
            &s(again.path())
        ]),
        0
    );
    assert_eq!(
        std::fs::read(dir.path().join("comparison.csv")).unwrap(),
        std::fs::read(again.path().join("comparison.csv")).unwrap()
    );
}

#[test]
fn frontier_and_replay_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let assets = format!("{DATA}/level1.csv");
    assert_eq!(
        run(&["frontier", "--assets", &assets, "--points", "4", "--seed", "8", "--out", &out]),
        0
    );
    let first = std::fs::read(dir.path().join("frontier.csv")).unwrap();
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 5);
    assert!(replay(&dir.path().join(MANIFEST_FILE)).unwrap().is_empty());
    assert_eq!(std::fs::read(dir.path().join("frontier.csv")).unwrap(), first);

    let oracle = tempfile::tempdir().unwrap();
    let cfg = format!("{DATA}/small.toml");
    let small = format!("{DATA}/small.csv");
    assert_eq!(
        run(&[
            "frontier",
            "--assets",
            &small,
            "--config",
            &cfg,
            "--solver",
            "oracle",
            "--out",
            &s(oracle.path())
        ]),
        0
    );
}

#[test]
fn gen_market_honours_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            run(&[
                "gen-market",
                "--regime",
                "flat",
                "--days",
                "12",
                "--n-assets",
                "3",
                "--seed",
                "5",
                "--out",
                &s(d.path())
            ]),
            0
        );
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("series.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[ga]\ncrossover_rate = 0.9\nmutation_rate = 0.3\n").unwrap();
    assert!(load_config(&cfg).is_err());
    let out = s(&dir.path().join("out"));
    assert_ne!(
        run(&[
            "grid-check",
            "--assets",
            &format!("{DATA}/level1.csv"),
            "--config",
            &s(&cfg),
            "--out",
            &out
        ]),
        0
    );
}

#[test]
fn asset_files_round_trip_and_match_presets() {
    for level in 1..=6 {
        assert_eq!(
            load_assets(format!("{DATA}/level{level}.csv")).unwrap(),
            level_assets(level, 10).unwrap()
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.csv");
    let specs = level_assets(2, 7).unwrap();
    save_assets(&p, &specs).unwrap();
    assert_eq!(load_assets(&p).unwrap(), specs);
}
