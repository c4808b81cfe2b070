use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use trsw_cli::experiments;
use trsw_cli::RunConfig;

/// Thermal rotating shallow water solver.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Default output directory.
    #[arg(long, global = true, env = "TRSW_OUT_DIR", default_value = "out")]
    out_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML file.
    Run { config: PathBuf },
    /// Run a named experiment suite.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(experiments::NAMES))]
        name: String,
        /// Output directory (defaults to <out-root>/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let out = cfg.output.dir.clone().unwrap_or(cli.out_root);
            let s = trsw_cli::run(&cfg, &out)?;
            let d = s.drifts;
            println!(
                "{} steps to t = {} s in {:.2?}; output in {}",
                s.steps,
                s.t,
                s.wall,
                s.out_dir.display()
            );
            println!(
                "final drifts: M {:.3e}  S {:.3e}  E {:.3e}  Z {:.3e}  W {:.3e}",
                d.mass, d.buoyancy, d.energy, d.entropy, d.vorticity
            );
        }
        Command::Experiment { name, out } => {
            let out = out.unwrap_or_else(|| cli.out_root.join(&name));
            let summary = experiments::run_named(&name, &out, cli.seed)?;
            print!("{summary}");
        }
    }
    Ok(())
}
