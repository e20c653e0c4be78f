use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use shadowlab::config::ExperimentConfig;
use shadowlab::output;
use shadowlab::runner::{self, JacobianMode};
use shadowlab_core::zoo::BUILTIN_MODELS;

#[derive(Parser)]
#[command(name = "shadowlab", version, about = "Reaction-diffusion-ODE systems against their shadow limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `outputs` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full system for every epsilon; writes full_<eps>.csv.
    Simulate(Common),
    /// Integrate the shadow system; writes shadow.csv.
    Shadow(Common),
    /// Error sweep over eps_list; writes results.csv and rates.json.
    ErrorSweep {
        #[command(flatten)]
        common: Common,
        /// Record wall-clock times instead of 0.
        #[arg(long)]
        timings: bool,
        /// Also write series_<eps>.csv per row.
        #[arg(long)]
        series: bool,
    },
    /// Spectrum, dissipativity and evolution probes; writes stability.json.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Freeze the Jacobian at the shadow state at T_probe.
        #[arg(long)]
        final_state: bool,
    },
    /// Truncated error system and remainder bound; writes truncation.json.
    TruncateCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25)]
        delta0: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Built-in models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
}

#[derive(Subcommand)]
enum ModelsAction {
    List,
}

fn prepare(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let cfg = ExperimentConfig::from_path(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    let dir = common.out.clone().unwrap_or_else(|| cfg.outputs.clone());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok((cfg, dir))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Models { action: ModelsAction::List } => {
            for (name, about) in BUILTIN_MODELS {
                println!("{name:16} {about}");
            }
        }
        Command::Simulate(common) => {
            let (cfg, dir) = prepare(&common)?;
            for (eps, traj) in cfg.eps_list.iter().zip(runner::run_full(&cfg)?) {
                write(&dir.join(format!("full_{}.csv", output::eps_label(*eps))), &output::full_csv(&traj))?;
            }
        }
        Command::Shadow(common) => {
            let (cfg, dir) = prepare(&common)?;
            write(&dir.join("shadow.csv"), &output::shadow_csv(&runner::run_shadow(&cfg)?))?;
        }
        Command::ErrorSweep { common, timings, series } => {
            let (cfg, dir) = prepare(&common)?;
            let sweep = runner::run_sweep(&cfg, series)?;
            write(&dir.join("results.csv"), &output::results_csv(&sweep, timings))?;
            output::write_json(&dir.join("rates.json"), &output::rates_json(&sweep, cfg.alpha, cfg.solver.t_cap))?;
            for row in &sweep.rows {
                if let Some(s) = &row.series {
                    write(&dir.join(format!("series_{}.csv", output::eps_label(row.epsilon))), &output::series_csv(s))?;
                }
                if let Err(e) = &row.outcome {
                    eprintln!("epsilon {}: {e}", row.epsilon);
                }
            }
            if sweep.any_failed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Stability { common, final_state } => {
            let (cfg, dir) = prepare(&common)?;
            let mode = if final_state { JacobianMode::FinalState } else { JacobianMode::Trajectory };
            let run = runner::run_stability(&cfg, mode)?;
            output::write_json(&dir.join("stability.json"), &output::stability_json(&run, cfg.stability.r_exponent))?;
            println!("spectral bound {:.6e}", run.report.spectral_bound);
        }
        Command::TruncateCheck { common, delta0, samples } => {
            let (cfg, dir) = prepare(&common)?;
            let rows = runner::run_truncation(&cfg, delta0, samples)?;
            let failed = rows.iter().any(Result::is_err);
            let rows: Vec<_> = cfg.eps_list.iter().copied().zip(rows).collect();
            output::write_json(&dir.join("truncation.json"), &output::truncation_json(cfg.model_name(), &rows))?;
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
