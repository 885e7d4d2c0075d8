use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use quso_cli::config::Kind;

/// Cooling-network design experiments.
#[derive(Debug, Parser)]
#[command(name = "quso", version)]
struct Args {
    #[arg(value_enum)]
    command: Kind,

    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads, 0 for all logical cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match quso_cli::run(args.command, &args.config, args.out.as_deref(), args.seed, args.workers) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
