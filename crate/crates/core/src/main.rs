use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sgp_pinn::io::{Checkpoint, IoError, RunConfig};
use sgp_pinn::run::{self, PlotOptions, PredictOptions, RunError};

/// Physics-informed neural solver for rate-dependent strain-gradient plasticity.
///
/// Set SGP_PINN_THREADS to fix the number of worker threads used in training.
#[derive(Parser)]
#[command(name = "sgp-pinn", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run directory; defaults to `<output_dir>/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a network and write checkpoints and the loss history.
    Train(TrainArgs),
    /// Train a parametric network and predict at the configured sweep values.
    Sweep(TrainArgs),
    /// Evaluate a checkpoint: stress-strain series, profile, field map, probes.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output directory; defaults to `predict/` next to the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Points per axis of the field map.
        #[arg(long)]
        grid: Option<usize>,
        /// Probe point in scaled coordinates, comma separated; repeatable.
        #[arg(long, value_parser = parse_probe)]
        probe: Vec<Vec<f64>>,
    },
    /// Run the classical reference solver for a config.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `<output_dir>/<experiment>/oracle`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Overlay columns of one or more tables as an SVG line plot.
    Plot {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        title: Option<String>,
        #[arg(long)]
        log_y: bool,
    },
}

fn parse_probe(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}")))
        .collect()
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn default_dir(cfg: &RunConfig) -> PathBuf {
    Path::new(&cfg.output_dir).join(&cfg.experiment)
}

fn train(a: &TrainArgs, sweep: bool) -> Result<(), RunError> {
    let cfg = load_config(&a.config, a.seed)?;
    if sweep && cfg.sweep.is_none() {
        return Err(IoError::Config("sweep: the config has no [sweep] section".into()).into());
    }
    let out = a.out.clone().unwrap_or_else(|| default_dir(&cfg));
    let r = run::train(&cfg, &out)?;
    println!(
        "trained {} epochs ({:?}), final loss {:.4e}",
        r.fit.adam.step,
        r.fit.stop,
        r.fit.final_loss().unwrap_or(f64::NAN)
    );
    if let Some(e) = &r.fit.error {
        eprintln!("warning: {e}");
    }
    println!("{}", r.checkpoint.display());
    println!("{}", r.history.display());
    if sweep {
        let ck = Checkpoint::load(&r.checkpoint)?;
        for p in run::predict(&ck, &out.join("predict"), &PredictOptions::default())? {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.cmd {
        Cmd::Train(a) => train(&a, false),
        Cmd::Sweep(a) => train(&a, true),
        Cmd::Predict {
            checkpoint,
            out,
            grid,
            probe,
        } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let out = out.unwrap_or_else(|| checkpoint.parent().unwrap_or(Path::new(".")).join("predict"));
            for p in run::predict(&ck, &out, &PredictOptions { grid, probes: probe })? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Cmd::Oracle { config, out } => {
            let cfg = load_config(&config, None)?;
            let out = out.unwrap_or_else(|| default_dir(&cfg).join("oracle"));
            for p in run::oracle(&cfg, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Cmd::Plot {
            tables,
            out,
            x,
            y,
            title,
            log_y,
        } => {
            run::plot(&tables, &out, &PlotOptions { x, y, title, log_y })?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RunError::Io(IoError::Config(_)) | RunError::Usage(_) | RunError::Unsupported(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
