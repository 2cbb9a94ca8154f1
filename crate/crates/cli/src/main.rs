use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use enaqt_cli::analysis::summary_table;
use enaqt_cli::commands;

#[derive(Parser)]
#[command(
    name = "enaqt",
    version,
    about = "Noise-assisted transport in random dipole networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `outputs.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Base seed (overrides `ensemble.base_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Continue a partially completed run in `--out`.
    #[arg(long, global = true)]
    resume: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the ensemble's networks only.
    Generate,
    /// Sweep one network under every configured environment.
    Sweep {
        /// Network JSON file, or `showcase` for the bundled tabulated network.
        #[arg(long)]
        network: Option<String>,
    },
    /// Run the full ensemble.
    Ensemble,
    /// Recompute aggregate tables from stored records in `--out`.
    Analyze,
    /// Check every file in `--out` against its manifest.
    Verify,
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    cli.out.clone().context("--out is required for this command")
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Generate => {
            let spec = commands::load_spec(cli.config.as_deref(), cli.out.as_deref(), cli.seed)?;
            let o = commands::generate(&spec)?;
            println!(
                "generated {} networks ({} failed) in {}",
                o.generated,
                o.failures.len(),
                spec.outputs.directory.display()
            );
            for (i, e) in &o.failures {
                eprintln!("network {i}: {e}");
            }
        }
        Command::Sweep { network } => {
            let spec = commands::load_spec(cli.config.as_deref(), cli.out.as_deref(), cli.seed)?;
            let o = commands::sweep(&spec, network.as_deref())?;
            println!("{:<16} {:>6} {:>6}  peak Γ (eV)", "environment", "valid", "peaks");
            for r in &o.result.records {
                let gammas: Vec<String> = r.peak_gammas.iter().map(|g| format!("{g:.3e}")).collect();
                println!(
                    "{:<16} {:>6} {:>6}  {}",
                    r.environment,
                    r.valid_points,
                    r.peak_count,
                    gammas.join(" ")
                );
            }
        }
        Command::Ensemble => {
            let spec = commands::load_spec(cli.config.as_deref(), cli.out.as_deref(), cli.seed)?;
            let o = commands::ensemble(&spec, cli.resume)?;
            print!("{}", summary_table(&o.summary)?);
            println!(
                "{} networks computed this run, {} files in {}",
                o.computed,
                o.manifest.files.len(),
                spec.outputs.directory.display()
            );
        }
        Command::Analyze => {
            let root = out_dir(&cli)?;
            let summary = commands::analyze(&root, cli.config.as_deref())?;
            print!("{}", summary_table(&summary)?);
        }
        Command::Verify => {
            let root = out_dir(&cli)?;
            let report = commands::verify(&root)?;
            for f in &report.missing {
                println!("missing   {f}");
            }
            for f in &report.modified {
                println!("modified  {f}");
            }
            for f in &report.unlisted {
                println!("unlisted  {f}");
            }
            println!(
                "{} files checked: {}",
                report.checked,
                if report.ok() { "ok" } else { "MISMATCH" }
            );
            return Ok(report.ok());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
