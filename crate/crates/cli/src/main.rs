mod commands;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use romclosure::env::ClosureMode;

#[derive(Parser)]
#[command(
    name = "romclosure",
    version,
    about = "Reinforcement-learned eddy-viscosity closures for POD-Galerkin ROMs of Burgers flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RomModel {
    /// Galerkin projection on the resolved modes.
    Gp,
    /// Galerkin projection on resolved plus test-scale modes.
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the exact solution into a snapshot CSV.
    GenerateData {
        #[arg(long, default_value_t = 0.001)]
        nu: f64,
        #[arg(long, default_value_t = 1024)]
        n_points: usize,
        #[arg(long, default_value_t = 500)]
        n_snapshots: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract POD modes; writes basis.csv and singular_values.csv into OUT.
    Pod {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        r: usize,
        #[arg(long, default_value_t = 16)]
        r_total: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate a closure-free ROM and write its modal trajectory.
    Rom {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        re: f64,
        #[arg(long, value_enum, default_value_t = RomModel::Gp)]
        model: RomModel,
        /// Number of output instants on [0, 1].
        #[arg(long, default_value_t = 500)]
        n_snapshots: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one closure agent.
    Train {
        #[arg(long)]
        mode: ClosureMode,
        /// Experiment configuration (.json or .toml); defaults if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Write per-step diagnostics of a deterministic episode at every checkpoint.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate every policy.ckpt found below a directory.
    Evaluate {
        #[arg(long)]
        checkpoints: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1200.0, 1500.0, 2000.0])]
        re: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Supplies the problem when no checkpoint is found, and the field stride.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Data, POD, training of every mode and seed, and the RMSE table.
    ReproduceTable1 {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `out_dir` of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::GenerateData {
            nu,
            n_points,
            n_snapshots,
            out,
        } => commands::generate_data(nu, n_points, n_snapshots, &out),
        Command::Pod { data, r, r_total, out } => commands::pod(&data, r, r_total, &out),
        Command::Rom {
            basis,
            re,
            model,
            n_snapshots,
            out,
        } => commands::rom(&basis, re, model, n_snapshots, &out),
        Command::Train {
            mode,
            config,
            seed,
            out_dir,
            trace,
        } => {
            let cfg = commands::load_config(config.as_deref())?;
            commands::train(&cfg, mode, seed, &out_dir, trace).map(|_| ())
        }
        Command::Evaluate {
            checkpoints,
            re,
            out,
            config,
        } => {
            let cfg = commands::load_config(config.as_deref())?;
            commands::evaluate(&checkpoints, &re, &out, &cfg)
        }
        Command::ReproduceTable1 { config, out } => {
            let mut cfg = commands::load_config(config.as_deref())?;
            if let Some(out) = out {
                cfg.out_dir = out.to_string_lossy().into_owned();
            }
            commands::reproduce_table1(&cfg)
        }
    }
}
