//! Command-line entry point: run experiments, print equilibrium oracles,
//! and compute metric tables and plot data from run directories.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use chainlab_core::llm::{ClientConfig, MockSpec};
use chainlab_core::market;
use chainlab_core::runner::{
    self, load_manifest, verify_run, ClientSelector, GameConfig, MetricsOptions, RunConfig,
    Scenario, SeedSpec,
};

#[derive(Parser)]
#[command(name = "chainlab", version, about = "Supply chain game laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and persist episode records.
    Run(RunArgs),
    /// Print the analytic Nash equilibrium of a market scenario.
    Equilibrium { scenario: PathBuf },
    /// Write metrics.csv from one or more run directories.
    Metrics(MetricsArgs),
    /// Emit plot-ready CSV files from a run directory.
    PlotData { run_dir: PathBuf },
    /// Replay recorded episodes and report any divergence.
    Verify { run_dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Base seed; episode k uses seed + k. Defaults to the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long, default_value_t = 1)]
    reps: u32,
    /// Use the deterministic offline mock client.
    #[arg(long)]
    mock: bool,
    /// Mock reply range (used with --mock).
    #[arg(long, default_value_t = 0)]
    mock_lo: u32,
    #[arg(long, default_value_t = 20)]
    mock_hi: u32,
    /// Output directory.
    #[arg(long, default_value = "runs/out")]
    out: PathBuf,
    /// Parallel episode ceiling.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Chat-completions endpoint URL (live mode).
    #[arg(long)]
    endpoint: Option<String>,
    /// Default model id (live mode).
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API token (live mode).
    #[arg(long, default_value = "CHAINLAB_API_TOKEN")]
    token_env: String,
    /// Request timeout in seconds (live mode).
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
}

#[derive(Args)]
struct MetricsArgs {
    /// Run directories (or one directory containing run directories).
    run_dirs: Vec<PathBuf>,
    /// Output file; defaults to metrics.csv inside the first directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Warm-up periods excluded from variance computations.
    #[arg(long, default_value_t = 0)]
    warmup: usize,
    /// Use this theoretical demand variance instead of the realized one.
    #[arg(long)]
    theoretical_demand_variance: Option<f64>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Equilibrium { scenario } => cmd_equilibrium(&scenario),
        Command::Metrics(args) => cmd_metrics(args),
        Command::PlotData { run_dir } => cmd_plot_data(&run_dir),
        Command::Verify { run_dir } => cmd_verify(&run_dir),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let client = if args.mock {
        ClientSelector::Mock { spec: MockSpec::Seeded { lo: args.mock_lo, hi: args.mock_hi } }
    } else {
        let mut config = ClientConfig::default();
        if let Some(endpoint) = args.endpoint {
            config.endpoint_url = endpoint;
        }
        if let Some(model) = args.model {
            config.model_id = model;
        }
        config.auth_token_env = args.token_env;
        config.timeout_secs = args.timeout;
        ClientSelector::Http { config }
    };
    let config = RunConfig {
        scenario_path: args.scenario,
        repetitions: args.reps,
        seeds: args.seed.map(|base| SeedSpec::Base { base }),
        out_dir: args.out,
        client,
        parallelism: args.parallel,
    };
    let summary = runner::run(&config).context("run failed")?;
    let flagged = summary.flagged_count();
    let fallbacks: u32 = summary.episodes.iter().map(|e| e.fallback_decisions).sum();
    println!(
        "run complete: {} episode(s) in {} ({} flagged, {} fallback decision(s))",
        summary.episodes.len(),
        summary.run_dir.display(),
        flagged,
        fallbacks
    );
    Ok(if flagged == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_equilibrium(path: &PathBuf) -> Result<ExitCode> {
    let scenario = Scenario::from_path(path).context("loading scenario")?;
    let GameConfig::Market(market_scenario) = &scenario.game else {
        bail!("equilibrium applies to market scenarios");
    };
    let eq = market::equilibrium(market_scenario).context("solving equilibrium")?;
    println!("{}", serde_json::to_string_pretty(&eq)?);
    Ok(ExitCode::SUCCESS)
}

fn expand_run_dirs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for input in inputs {
        if input.join("manifest.json").exists() {
            dirs.push(input.clone());
            continue;
        }
        let mut found = false;
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(input)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.join("manifest.json").exists())
                .collect();
            entries.sort();
            if !entries.is_empty() {
                found = true;
                dirs.extend(entries);
            }
        }
        if !found {
            bail!("{} is not a run directory and contains none", input.display());
        }
    }
    Ok(dirs)
}

fn cmd_metrics(args: MetricsArgs) -> Result<ExitCode> {
    if args.run_dirs.is_empty() {
        bail!("at least one run directory required");
    }
    let dirs = expand_run_dirs(&args.run_dirs)?;
    let out = args.out.unwrap_or_else(|| args.run_dirs[0].join("metrics.csv"));
    let options = MetricsOptions {
        warmup: args.warmup,
        theoretical_demand_variance: args.theoretical_demand_variance,
    };
    let mut wrote_any = false;
    let beer_dirs: Vec<PathBuf> = dirs
        .iter()
        .filter(|d| {
            runner::load_run_scenario(d)
                .map(|s| matches!(s.game, GameConfig::Beer(_)))
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    if !beer_dirs.is_empty() {
        runner::write_metrics_csv(&beer_dirs, &out, &options)?;
        println!("wrote {}", out.display());
        wrote_any = true;
    }
    for dir in &dirs {
        let scenario = runner::load_run_scenario(dir)?;
        if matches!(scenario.game, GameConfig::Market(_)) {
            let conv = dir.join("convergence.csv");
            runner::write_convergence_csv(dir, &conv)?;
            println!("wrote {}", conv.display());
            wrote_any = true;
        }
    }
    if !wrote_any {
        bail!("no beer or market runs found");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot_data(run_dir: &PathBuf) -> Result<ExitCode> {
    let written = runner::emit_plot_data(run_dir).context("emitting plot data")?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(run_dir: &PathBuf) -> Result<ExitCode> {
    let manifest = load_manifest(run_dir)?;
    let results = verify_run(run_dir)?;
    let mut clean = true;
    for (episode, divergences) in &results {
        if divergences.is_empty() {
            println!("episode {episode}: replay exact");
        } else {
            clean = false;
            println!("episode {episode}: {} divergence(s)", divergences.len());
            for d in divergences {
                println!("  {d}");
            }
        }
    }
    println!("{} episode(s) checked against {}", results.len(), manifest.name);
    Ok(if clean { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
