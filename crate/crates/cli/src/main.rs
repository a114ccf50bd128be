//! `mlrecon`: phantoms, reconstructions, comparisons and oracle runs.
//!
//! Exit codes: 0 success, 1 configuration/usage/IO error, 2 numeric abort.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mlrecon_core::phantom::Phantom;

#[derive(Parser, Debug)]
#[command(name = "mlrecon", version, about = "Multilevel reweighted compressed-sensing reconstruction")]
pub struct Cli {
    /// Worker threads for `compare` (reconstructions themselves are sequential).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Exact determinism: one thread, timing fields written as zero.
    #[arg(long, global = true)]
    pub test_mode: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a phantom as a raw float file plus a PNG preview.
    Phantom {
        /// shepp-logan, piecewise-affine or texture-mix.
        name: Phantom,
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Output `.raw` path; the preview goes next to it as `.png`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment config.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the mask seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several configs on the same problem and tabulate them.
    Compare {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Frozen true-coefficient weights, constant vs multilevel factors.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Reference image; defaults to the image of the config.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
