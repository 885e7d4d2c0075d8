//! Experiment harness around the `quso` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

use serde_json::Value;

use config::Kind;
use error::CliError;
use output::{Meta, OutputDir};

pub fn command_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Solve => "solve",
        Kind::BlockVerify => "block-verify",
        Kind::QsvtSweep => "qsvt-sweep",
        Kind::Qaoa => "qaoa",
        Kind::Quso => "quso",
        Kind::Landscape => "landscape",
        Kind::Resources => "resources",
    }
}

/// Loads `config_path`, runs `kind` on a pool of `workers` threads (0 picks
/// the number of logical cores) and returns the summary.
pub fn run(
    kind: Kind,
    config_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    workers: usize,
) -> Result<Value, CliError> {
    let cfg = config::load(config_path, kind, out, seed)?;
    let mut dir = OutputDir::create(
        &cfg.output_dir,
        Meta::new(command_name(kind), &cfg.hash, cfg.config.seed),
    )?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| match kind {
        Kind::Solve => commands::cmd_solve(&cfg, &mut dir),
        Kind::BlockVerify => commands::cmd_block_verify(&cfg, &mut dir),
        Kind::QsvtSweep => commands::cmd_qsvt_sweep(&cfg, &mut dir),
        Kind::Qaoa => commands::cmd_qaoa(&cfg, &mut dir),
        Kind::Quso => commands::cmd_quso(&cfg, &mut dir),
        Kind::Landscape => commands::cmd_landscape(&cfg, &mut dir),
        Kind::Resources => commands::cmd_resources(&cfg, &mut dir),
    })
}
