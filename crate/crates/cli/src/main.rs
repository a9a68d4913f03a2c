use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcsnn::data::CropRegion;
use mcsnn::experiment::{run_eval, run_preprocess, run_sweep_k, run_synth_data, run_train};
use mcsnn::{Error, Execution};

/// Multi-compartment spiking network experiments.
#[derive(Debug, Parser)]
#[command(name = "mcsnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
    /// Run compartments and examples on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train online over the training split, logging metrics and checkpoints.
    Train(Common),
    /// Evaluate a checkpoint on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Train and evaluate once per number of compartments.
    SweepK {
        #[command(flatten)]
        common: Common,
        /// Comma-separated compartment counts, e.g. `1,2,5`.
        #[arg(long = "k", value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
    },
    /// Write the config's synthetic task as tensor files plus a manifest.
    SynthData {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Crop and bin event recordings listed in a manifest into tensors.
    Preprocess {
        /// Manifest whose entries are event files.
        #[arg(short, long)]
        input: PathBuf,
        /// `x,y,width,height` in sensor pixels.
        #[arg(long, value_parser = parse_crop)]
        crop: CropRegion,
        #[arg(long)]
        steps: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn parse_crop(s: &str) -> Result<CropRegion, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, width, height] => Ok(CropRegion {
            x,
            y,
            width,
            height,
        }),
        _ => Err(format!("expected x,y,width,height, got {s:?}")),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "config" => 3,
        "data" | "io" => 4,
        "training" => 5,
        "shape" => 6,
        _ => 7,
    }
}

fn run(cli: Cli) -> mcsnn::Result<()> {
    match cli.command {
        Command::Train(c) => {
            let outcome = run_train(&c.config, c.seed, &c.out, c.exec())?;
            let s = &outcome.summary;
            println!(
                "trained on {} examples ({} steps), K={}",
                s.examples_seen, s.total_steps, s.num_compartments
            );
            if let Some(best) = &outcome.best {
                println!(
                    "best after {} examples: accuracy {:.4} ece {:.4} log-likelihood {:.4}",
                    best.examples_seen, best.accuracy, best.ece, best.mean_log_likelihood
                );
            }
        }
        Command::Eval {
            common: c,
            checkpoint,
        } => {
            let report = run_eval(&c.config, &checkpoint, c.seed, &c.out, c.exec())?;
            let s = &report.summary;
            println!(
                "{} examples: accuracy {:.4} ece {:.4} log-likelihood {:.4}",
                s.num_examples, s.accuracy, s.ece, s.mean_log_likelihood
            );
        }
        Command::SweepK {
            common: c,
            k_values,
        } => {
            let rows = run_sweep_k(&c.config, &k_values, c.seed, &c.out, c.exec())?;
            for r in rows {
                println!(
                    "K={:<3} accuracy {:.4} ece {:.4} log-likelihood {:.4} broadcast {}/step",
                    r.k, r.accuracy, r.ece, r.mean_log_likelihood, r.broadcast_per_step
                );
            }
        }
        Command::SynthData { config, seed, out } => {
            let manifest = run_synth_data(&config, seed, &out)?;
            println!("{}", manifest.display());
        }
        Command::Preprocess {
            input,
            crop,
            steps,
            out,
        } => {
            let manifest = run_preprocess(&input, crop, steps, &out)?;
            println!("{}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
