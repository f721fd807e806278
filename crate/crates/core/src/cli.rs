//! The `urebal` command line.
//!
//! Every subcommand writes its files into `--out` together with a
//! `manifest.json` recording the arguments, resolved configuration, seed and
//! SHA-256 of each output.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backtest::{compare, generate_market, simulate, BacktestModel, Regime, StrategySpec, SyntheticMarketSpec};
use crate::error::{Error, Result};
use crate::frontier::{lambda_grid, point_seed, scan, Solver};
use crate::ga::evolve;
use crate::io::{
    fmt_f64, load_assets, load_config, load_series, write_frontier, write_rows, write_series, write_summary,
    write_wealth_path, RunConfig, RunManifest, SolverKind, StrategyChoice, MANIFEST_FILE,
};
use crate::model::{AssetSpec, PortfolioWeights, RebalanceProblem};
use crate::oracle::{enumerate_optimum, rpd, OracleParams};
use crate::presets::small_instance;
use crate::uncertainty::QuantileGrid;

/// Absolute tolerance on grid expected values.
pub const GRID_MEAN_TOL: f64 = 1e-9;
/// Relative tolerance on grid variances.
pub const GRID_VAR_REL_TOL: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "urebal", version, about = "Portfolio rebalancing under uncertain returns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Efficient frontier by sweeping the minimum return.
    Frontier {
        #[command(flatten)]
        common: Common,
        /// Asset CSV.
        #[arg(long)]
        assets: PathBuf,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
    },
    /// CPPI and buy-and-hold wealth paths on a given or synthetic series.
    Backtest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        assets: PathBuf,
        /// Return series CSV; a synthetic market is generated when absent.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        days: Option<usize>,
        /// Set every transaction cost to zero.
        #[arg(long)]
        zero_costs: bool,
    },
    /// Genetic algorithm against lattice enumeration, with RPD per point.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        /// Asset CSV; the built-in four-stock instance when absent.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Independent GA runs per point.
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
    /// Grid moments against closed forms for every asset.
    GridCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        assets: PathBuf,
    },
    /// Synthetic return series.
    GenMarket {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        days: Option<usize>,
        /// Number of risky assets.
        #[arg(long, default_value_t = 10)]
        n_assets: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Ga,
    Oracle,
}

/// Parses `args` (program name first) and runs the subcommand; returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli.command, command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

struct Run {
    out: PathBuf,
    config: RunConfig,
    seed: u64,
    manifest: RunManifest,
    files: Vec<String>,
}

impl Run {
    fn start(common: &Common, command: Vec<String>) -> Result<Self> {
        let mut config = match &common.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = common.seed {
            config.seed = Some(s);
        }
        let seed = config.resolve_seed();
        std::fs::create_dir_all(&common.out)?;
        let manifest = RunManifest::new(command, serde_json::Value::Null, seed, Utc::now());
        Ok(Self {
            out: common.out.clone(),
            config,
            seed,
            manifest,
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.config = serde_json::to_value(&self.config)?;
        self.manifest.record_outputs(&self.out, &self.files)?;
        self.manifest.save(self.out.join(MANIFEST_FILE))?;
        for f in &self.files {
            println!("wrote {}", self.out.join(f).display());
        }
        Ok(())
    }
}

fn warn(lines: Vec<String>) {
    for l in lines {
        eprintln!("warning: {l}");
    }
}

fn problem_for(config: &RunConfig, specs: Vec<AssetSpec>) -> Result<RebalanceProblem> {
    let n1 = specs.len();
    let before = match &config.model.before {
        Some(b) => {
            Error::check_len(n1, b.len())?;
            PortfolioWeights::new(b.clone())?
        }
        None => PortfolioWeights::all_risk_free(n1 - 1),
    };
    RebalanceProblem::new(
        specs,
        config.model.model_config(),
        config.model.market()?,
        before,
        config.model.k,
    )
}

fn run(command: Command, argv: Vec<String>) -> Result<()> {
    match command {
        Command::Frontier {
            common,
            assets,
            points,
            solver,
        } => {
            let mut run = Run::start(&common, argv)?;
            let specs = load_assets(&assets)?;
            warn(run.config.fit_to(specs.len() - 1));
            if let Some(p) = points {
                run.config.frontier.points = p;
            }
            if let Some(s) = solver {
                run.config.frontier.solver = match s {
                    SolverArg::Ga => SolverKind::Ga,
                    SolverArg::Oracle => SolverKind::Oracle,
                };
            }
            run.config.validate()?;
            let problem = problem_for(&run.config, specs)?;
            let grid = lambda_grid(&problem, run.config.frontier.points)?;
            if let Some(d) = &grid.diagnostic {
                eprintln!("warning: {d}");
            }
            let solver = match run.config.frontier.solver {
                SolverKind::Ga => Solver::Ga(run.config.ga.clone()),
                SolverKind::Oracle => Solver::Oracle(OracleParams {
                    step: run.config.frontier.oracle_step,
                    max_assets_hint: None,
                }),
            };
            let result = scan(&problem, &solver, &grid.lambdas);
            for d in &result.dropped {
                eprintln!("warning: lambda {} dropped: {}", fmt_f64(d.lambda), d.reason);
            }
            println!(
                "{} frontier points, {} dropped, {} dominated",
                result.points.len(),
                result.dropped.len(),
                result.dominated
            );
            write_frontier(run.create("frontier.csv")?, &result.points)?;
            run.finish()
        }

        Command::Backtest {
            common,
            assets,
            series,
            regime,
            days,
            zero_costs,
        } => {
            let mut run = Run::start(&common, argv)?;
            let specs = load_assets(&assets)?;
            warn(run.config.fit_to(specs.len() - 1));
            if let Some(r) = regime {
                run.config.backtest.regime = r;
            }
            if let Some(d) = days {
                run.config.backtest.days = d;
            }
            run.config.backtest.zero_costs |= zero_costs;
            run.config.validate()?;
            let bt = run.config.backtest.clone();
            let model_cfg = &run.config.model;

            let prices = match &series {
                Some(p) => load_series(p)?,
                None => {
                    let mut spec = SyntheticMarketSpec::preset(bt.regime, bt.days, specs.len() - 1);
                    spec.risk_free_rate = model_cfg.r_f;
                    spec.daily_drift = bt.daily_drift.unwrap_or(spec.daily_drift);
                    spec.daily_vol = bt.daily_vol.unwrap_or(spec.daily_vol);
                    spec.max_daily_loss = bt.max_daily_loss.unwrap_or(spec.max_daily_loss);
                    generate_market(&spec, run.seed)?
                }
            };
            let mut model = BacktestModel::new(specs, model_cfg.model_config(), model_cfg.w0, model_cfg.k)?;
            if bt.zero_costs {
                model = model.without_costs();
            }
            let mut strategies = Vec::new();
            if matches!(bt.strategy, StrategyChoice::Cppi | StrategyChoice::Both) {
                strategies.push(StrategySpec {
                    rebalance_every: bt.rebalance_every,
                    ..StrategySpec::cppi(model_cfg.m, model_cfg.floor)
                });
            }
            if matches!(bt.strategy, StrategyChoice::BuyAndHold | StrategyChoice::Both) {
                let e = bt
                    .initial_exposure
                    .unwrap_or(1.0 - model_cfg.floor / model_cfg.w0)
                    .clamp(0.0, 1.0);
                strategies.push(StrategySpec::buy_and_hold(e));
            }
            let paths = strategies
                .iter()
                .map(|s| simulate(s, &prices, &model, &run.config.ga))
                .collect::<Result<Vec<_>>>()?;
            let rows = compare(&paths)?;

            write_series(run.create("series.csv")?, &prices)?;
            for p in &paths {
                if p.ruined {
                    eprintln!("warning: {} path ruined", p.label);
                }
                write_wealth_path(run.create(&format!("wealth_{}.csv", p.label))?, p)?;
            }
            write_summary(run.create("comparison.csv")?, &rows)?;
            for r in &rows {
                println!(
                    "{}: terminal {:.2}, min {:.2}, costs {:.2}, max drawdown {:.4}",
                    r.label, r.terminal_wealth, r.min_wealth, r.total_cost, r.max_drawdown
                );
            }
            run.finish()
        }

        Command::OracleCompare {
            common,
            assets,
            points,
            runs,
        } => {
            let mut run = Run::start(&common, argv)?;
            let problem = match &assets {
                Some(path) => {
                    let specs = load_assets(path)?;
                    warn(run.config.fit_to(specs.len() - 1));
                    run.config.validate()?;
                    problem_for(&run.config, specs)?
                }
                None => {
                    let inst = small_instance();
                    run.config.model.h = inst.config.max_assets;
                    run.config.model.m = inst.market.multiplier;
                    run.config.model.w0 = inst.market.wealth;
                    run.config.model.floor = inst.market.floor;
                    run.config.model.before = Some(inst.before.as_slice().to_vec());
                    problem_for(&run.config, inst.specs)?
                }
            };
            if runs == 0 {
                return Err(Error::param("--runs must be at least 1"));
            }
            let grid = lambda_grid(&problem, points)?;
            if let Some(d) = &grid.diagnostic {
                return Err(Error::domain(d.clone()));
            }
            let oracle = OracleParams {
                step: run.config.frontier.oracle_step,
                max_assets_hint: None,
            };
            let mut rows = Vec::new();
            let mut rpds = Vec::new();
            for (i, &lambda) in grid.lambdas.iter().enumerate() {
                let p = problem.with_min_return(lambda)?;
                let Some(base) = enumerate_optimum(&p, &oracle)?.best else {
                    eprintln!("warning: lattice has no feasible point at lambda {}", fmt_f64(lambda));
                    continue;
                };
                for r in 0..runs {
                    let seed = point_seed(run.seed, i * runs + r);
                    let res = evolve(&run.config.ga.clone().with_seed(seed), &p)?;
                    let (ga_risk, dev) = match &res.best_feasible {
                        Some(s) => (fmt_f64(s.risk), rpd(s.risk, base.risk).map(fmt_f64).unwrap_or_default()),
                        None => (String::new(), String::new()),
                    };
                    if let Some(s) = &res.best_feasible {
                        if let Ok(v) = rpd(s.risk, base.risk) {
                            rpds.push(v);
                        }
                    }
                    rows.push(vec![
                        fmt_f64(lambda),
                        fmt_f64(base.risk),
                        seed.to_string(),
                        ga_risk,
                        dev,
                    ]);
                }
                println!("lambda {lambda:.6e}: oracle risk {:.6e}", base.risk);
            }
            rpds.sort_by(f64::total_cmp);
            if let (Some(max), Some(&median)) = (rpds.last(), rpds.get(rpds.len() / 2)) {
                println!("RPD over {} runs: max {max:+.4}%, median {median:+.4}%", rpds.len());
            }
            write_rows(
                run.create("oracle_compare.csv")?,
                &["lambda", "oracle_risk", "seed", "ga_risk", "rpd"],
                &rows,
            )?;
            run.finish()
        }

        Command::GridCheck { common, assets } => {
            let mut run = Run::start(&common, argv)?;
            let specs = load_assets(&assets)?;
            let (rows, failures) = grid_check(&specs, run.config.model.k)?;
            write_rows(
                run.create("grid_check.csv")?,
                &[
                    "index",
                    "family",
                    "closed_mean",
                    "grid_mean",
                    "mean_abs_err",
                    "closed_var",
                    "grid_var",
                    "var_err",
                    "pass",
                ],
                &rows,
            )?;
            run.finish()?;
            println!("{} of {} assets within tolerance", specs.len() - failures, specs.len());
            if failures > 0 {
                return Err(Error::domain(format!("{failures} assets outside grid tolerance")));
            }
            Ok(())
        }

        Command::GenMarket {
            common,
            regime,
            days,
            n_assets,
        } => {
            let mut run = Run::start(&common, argv)?;
            if let Some(r) = regime {
                run.config.backtest.regime = r;
            }
            if let Some(d) = days {
                run.config.backtest.days = d;
            }
            run.config.validate()?;
            let bt = &run.config.backtest;
            let mut spec = SyntheticMarketSpec::preset(bt.regime, bt.days, n_assets);
            spec.risk_free_rate = run.config.model.r_f;
            spec.daily_drift = bt.daily_drift.unwrap_or(spec.daily_drift);
            spec.daily_vol = bt.daily_vol.unwrap_or(spec.daily_vol);
            spec.max_daily_loss = bt.max_daily_loss.unwrap_or(spec.max_daily_loss);
            let series = generate_market(&spec, run.seed)?;
            write_series(run.create("series.csv")?, &series)?;
            run.finish()
        }
    }
}

/// Rows of the grid report and the number of assets outside tolerance.
/// Variance error is relative, or absolute for zero closed-form variance.
pub fn grid_check(specs: &[AssetSpec], levels: usize) -> Result<(Vec<Vec<String>>, usize)> {
    let dists: Vec<_> = specs.iter().map(|s| s.dist).collect();
    let grid = QuantileGrid::build(&dists, levels)?;
    let mut rows = Vec::new();
    let mut failures = 0;
    for (s, row) in specs.iter().zip(grid.rows()) {
        let k = row.len() as f64;
        let mean = row.iter().sum::<f64>() / k;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        let (cm, cv) = (s.dist.expected_value(), s.dist.variance());
        let mean_err = (mean - cm).abs();
        let var_err = if cv > 0.0 { (var - cv).abs() / cv } else { var.abs() };
        let pass = mean_err <= GRID_MEAN_TOL && var_err <= GRID_VAR_REL_TOL;
        if !pass {
            failures += 1;
        }
        rows.push(vec![
            s.index.to_string(),
            s.dist.family().to_string(),
            fmt_f64(cm),
            fmt_f64(mean),
            fmt_f64(mean_err),
            fmt_f64(cv),
            fmt_f64(var),
            fmt_f64(var_err),
            pass.to_string(),
        ]);
    }
    Ok((rows, failures))
}

/// Re-runs the command recorded in `manifest_path` and lists outputs whose
/// digests changed.
pub fn replay(manifest_path: &Path) -> Result<Vec<String>> {
    let m = RunManifest::load(manifest_path)?;
    let mut args = vec!["urebal".to_string()];
    args.extend(m.command.iter().cloned());
    if !m.command.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
        args.push("--seed".into());
        args.push(m.seed.to_string());
    }
    if run_cli(&args) != 0 {
        return Err(Error::domain("replayed command failed"));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    m.mismatches(dir)
}
