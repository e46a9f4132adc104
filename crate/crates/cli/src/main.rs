//! reflectolab: batch experiments on obliquely reflected diffusions over
//! converging domains.
//!
//! Subcommands: simulate, geometry-check, domain-convergence, hitting-check,
//! experiment. All are config-file driven (see docs/config-grammar.md);
//! results land in the output directory with a manifest. Exit codes: 0 on
//! pass/complete, 2 on a failing verdict, 1 on error.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};

use commands::CommandCtx;
use error::CliError;
use manifest::Manifest;

pub(crate) fn config_matrix(
    table: &toml::Value,
    key: &str,
) -> Result<reflectolab_core::linalg::Mat<f64>, CliError> {
    let v = table
        .get(key)
        .ok_or_else(|| CliError::config(config::ConfigError::at(key, "missing required key")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::config(config::ConfigError::at(key, "expected an array of rows")))?;
    let mut rows = Vec::new();
    for (i, r) in arr.iter().enumerate() {
        let row = r
            .as_array()
            .ok_or_else(|| CliError::config(config::ConfigError::at(format!("{key}[{i}]"), "expected a row")))?
            .iter()
            .map(|x| x.as_float().or_else(|| x.as_integer().map(|n| n as f64)))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::config(config::ConfigError::at(format!("{key}[{i}]"), "expected numbers")))?;
        rows.push(row);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::config(config::ConfigError::at(key, "matrix rows must be nonempty and equal length")));
    }
    Ok(reflectolab_core::linalg::Mat::from_rows(&rows))
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing; all artifacts go here).
    #[arg(long)]
    out: PathBuf,
    /// Base seed; overrides the config's `seed`, which overrides
    /// REFLECTOLAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run gated experiments even when a soundness gate fails; results are
    /// flagged UNSOUND.
    #[arg(long)]
    unsound_override: bool,
    /// Also dump full trajectories (paths.csv, paths.bin).
    #[arg(long)]
    dump_paths: bool,
    /// Increase verbosity.
    #[arg(short, long, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one reflected-diffusion ensemble.
    Simulate(CommonArgs),
    /// Assumption-1 / Lipschitz / projection diagnostics for a domain.
    GeometryCheck(CommonArgs),
    /// Weak / Wijsman / Hausdorff gap tables for a domain family.
    DomainConvergence(CommonArgs),
    /// Corner-avoidance criterion for an orthant SRBM.
    HittingCheck(CommonArgs),
    /// Theorem-level Monte Carlo convergence experiment.
    Experiment(CommonArgs),
}

#[derive(Parser, Debug)]
#[command(name = "reflectolab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::GeometryCheck(a) => ("geometry-check", a),
        Command::DomainConvergence(a) => ("domain-convergence", a),
        Command::HittingCheck(a) => ("hitting-check", a),
        Command::Experiment(a) => ("experiment", a),
    };
    match run(name, args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}

fn run(name: &str, args: &CommonArgs) -> Result<u8, CliError> {
    if let Some(threads) = args.threads {
        // First caller wins; tests may set it repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let started = Instant::now();
    let config_bytes = std::fs::read(&args.config)?;
    let config_text = String::from_utf8(config_bytes.clone())
        .map_err(|_| CliError::Internal("config file is not UTF-8".into()))?;
    let root = config::parse_toml(&config_text)?;
    std::fs::create_dir_all(&args.out)?;
    let env_seed = std::env::var("REFLECTOLAB_SEED").ok().and_then(|s| s.parse::<u64>().ok());
    let mut ctx = CommandCtx {
        root: &root,
        out_dir: &args.out,
        cli_seed: args.seed,
        env_seed,
        dump_paths: args.dump_paths,
        unsound_override: args.unsound_override,
        outputs: Vec::new(),
        seed_used: None,
    };
    let code = match name {
        "simulate" => commands::simulate(&mut ctx)?,
        "geometry-check" => commands::geometry_check(&mut ctx)?,
        "domain-convergence" => commands::domain_convergence(&mut ctx)?,
        "hitting-check" => commands::hitting_check(&mut ctx)?,
        "experiment" => commands::experiment(&mut ctx)?,
        _ => unreachable!(),
    };
    let mut manifest = Manifest::new(name, &args.config.display().to_string(), &config_bytes);
    manifest.seed = ctx.seed_used;
    manifest.threads = args.threads;
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.outputs = ctx.outputs.clone();
    let text = serde_json::to_string_pretty(&manifest).map_err(CliError::internal)?;
    std::fs::write(args.out.join("manifest.json"), text + "\n")?;
    if args.verbose > 0 {
        eprintln!("{name}: wrote {:?} to {}", ctx.outputs, args.out.display());
    }
    Ok(code)
}
