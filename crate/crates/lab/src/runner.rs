//! Experiment pipelines behind the subcommands.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use shadowlab_core::analysis::{
    error_series, fit_remainder_constant, rate_fit, removal_check, sample_remainder, simulate_truncated, AnalysisError,
    ErrorSeries, RateFit, TruncationConfig,
};
use shadowlab_core::fullsolve::{integrate_full, picard_solve, FullTrajectory, Method, SolverConfig, SolverError};
use shadowlab_core::model::ModelSpec;
use shadowlab_core::shadow::{
    correction_psi, fit_psi_decay, integrate_shadow, integrate_shadow_for, FitError, PsiDecayFit, PsiTrajectory,
    ShadowTrajectory,
};
use shadowlab_core::stability::{
    jacobian_at, stability_report, EvolutionOptions, JacobianField, StabilityError, StabilityOptions, StabilityReport,
};

use crate::config::{ConfigError, ExperimentConfig};

const PICARD_MAX_ITER: usize = 200;
const PICARD_TOL: f64 = 1e-12;
/// Metrics whose values all fall below this are treated as exactly zero and
/// not regressed.
pub const ZERO_ERROR: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("correction fit: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Full, shadow and correction trajectories on one shared time grid.
pub struct Solved {
    pub full: FullTrajectory,
    pub shadow: ShadowTrajectory,
    pub psi: PsiTrajectory,
}

pub fn solve_all(model: &ModelSpec, epsilon: f64, cfg: &SolverConfig) -> Result<Solved, RunError> {
    let full = match cfg.method {
        Method::Etd1 => integrate_full(model, epsilon, cfg)?,
        Method::Picard => picard_solve(model, epsilon, cfg, PICARD_MAX_ITER, PICARD_TOL)?.trajectory,
    };
    let shadow = integrate_shadow_for(model, cfg, epsilon)?;
    let psi = correction_psi(model, &shadow, epsilon, cfg)?;
    Ok(Solved { full, shadow, psi })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub max_sup_u: f64,
    pub max_sup_v: f64,
    pub max_mean_gap: f64,
    pub max_homog: f64,
    pub psi_fit: PsiDecayFit,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub epsilon: f64,
    pub horizon: f64,
    pub outcome: Result<RowMetrics, String>,
    pub series: Option<ErrorSeries>,
    pub wallclock_ms: u128,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

pub fn run_row(model: &ModelSpec, epsilon: f64, cfg: &SolverConfig, keep_series: bool) -> Row {
    let start = Instant::now();
    let computed = (|| -> Result<(RowMetrics, ErrorSeries), RunError> {
        let solved = solve_all(model, epsilon, cfg)?;
        let series = error_series(&solved.full, &solved.shadow, &solved.psi)?;
        let psi_fit = fit_psi_decay(&solved.psi)?;
        let metrics = RowMetrics {
            max_sup_u: series.max_sup_u(),
            max_sup_v: series.max_sup_v(),
            max_mean_gap: series.max_mean_gap(),
            max_homog: series.max_homog(),
            psi_fit,
        };
        Ok((metrics, series))
    })();
    let (outcome, series) = match computed {
        Ok((metrics, series)) => (Ok(metrics), keep_series.then_some(series)),
        Err(e) => (Err(e.to_string()), None),
    };
    Row { epsilon, horizon: cfg.t_end, outcome, series, wallclock_ms: start.elapsed().as_millis() }
}

pub const METRICS: [&str; 4] = ["max_sup_U", "max_sup_V", "max_mean_gap", "max_homog"];

#[derive(Debug, Clone, PartialEq)]
pub enum RateStatus {
    Fitted(RateFit),
    /// Every value is below [`ZERO_ERROR`].
    Zero,
    /// Fewer than three usable rows, or a fit error.
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub model: String,
    pub rows: Vec<Row>,
    pub rates: Vec<(&'static str, RateStatus)>,
}

impl Sweep {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(Row::failed)
    }
}

fn metric(m: &RowMetrics, name: &str) -> f64 {
    match name {
        "max_sup_U" => m.max_sup_u,
        "max_sup_V" => m.max_sup_v,
        "max_mean_gap" => m.max_mean_gap,
        _ => m.max_homog,
    }
}

pub fn fit_rates(rows: &[Row]) -> Vec<(&'static str, RateStatus)> {
    METRICS
        .iter()
        .map(|&name| {
            let points: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| r.outcome.as_ref().ok().map(|m| (r.epsilon, metric(m, name)))).collect();
            let status = if !points.is_empty() && points.iter().all(|(_, e)| *e < ZERO_ERROR) {
                RateStatus::Zero
            } else {
                match rate_fit(&points) {
                    Ok(fit) => RateStatus::Fitted(fit),
                    Err(e) => RateStatus::Skipped(e.to_string()),
                }
            };
            (name, status)
        })
        .collect()
}

/// One row per epsilon with `T = min(eps^(alpha-1), T_cap)`. Rows run in
/// parallel and come back in `eps_list` order; a failed row does not stop
/// the others.
pub fn run_sweep(cfg: &ExperimentConfig, keep_series: bool) -> Result<Sweep, RunError> {
    let model = cfg.model_spec()?;
    let rows: Vec<Row> = cfg
        .eps_list
        .par_iter()
        .map(|&eps| run_row(&model, eps, &cfg.solver_config(cfg.horizon(eps)), keep_series))
        .collect();
    let rates = fit_rates(&rows);
    Ok(Sweep { model: cfg.model_name().to_string(), rows, rates })
}

pub fn run_full(cfg: &ExperimentConfig) -> Result<Vec<FullTrajectory>, RunError> {
    let model = cfg.model_spec()?;
    cfg.eps_list
        .par_iter()
        .map(|&eps| {
            let scfg = cfg.solver_config(cfg.horizon(eps));
            Ok(match scfg.method {
                Method::Etd1 => integrate_full(&model, eps, &scfg)?,
                Method::Picard => picard_solve(&model, eps, &scfg, PICARD_MAX_ITER, PICARD_TOL)?.trajectory,
            })
        })
        .collect()
}

/// The shadow system does not involve epsilon; it runs on a uniform grid
/// up to the longest horizon of the sweep.
pub fn run_shadow(cfg: &ExperimentConfig) -> Result<ShadowTrajectory, RunError> {
    let model = cfg.model_spec()?;
    let t_end = cfg.eps_list.iter().map(|&e| cfg.horizon(e)).fold(0.0, f64::max);
    Ok(integrate_shadow(&model, &cfg.solver_config(t_end))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Along the shadow trajectory on `[0, T_probe]`.
    Trajectory,
    /// Frozen at the shadow state at `T_probe`.
    FinalState,
}

pub struct StabilityRun {
    pub model: String,
    pub mode: JacobianMode,
    pub diffusion: Vec<f64>,
    pub options: StabilityOptions,
    pub report: StabilityReport,
}

pub fn stability_options(cfg: &ExperimentConfig) -> StabilityOptions {
    let st = &cfg.stability;
    StabilityOptions {
        evolution: EvolutionOptions {
            probe_count: st.probe_count,
            t_probe: st.t_probe,
            dt: cfg.solver.dt,
            norm: st.p_norm.norm(),
            seed: cfg.seed,
        },
        mu: st.mu,
    }
}

pub fn run_stability(cfg: &ExperimentConfig, mode: JacobianMode) -> Result<StabilityRun, RunError> {
    let model = cfg.model_spec()?;
    let scfg = SolverConfig { resolve_layer: false, ..cfg.solver_config(cfg.stability.t_probe) };
    let shadow = integrate_shadow(&model, &scfg)?;
    let mut jac: JacobianField = jacobian_at(&model, &shadow)?;
    if mode == JacobianMode::FinalState {
        jac = jac.snapshot(jac.times().len() - 1);
    }
    let options = stability_options(cfg);
    let report = stability_report(&jac, &model.diffusion, &options)?;
    Ok(StabilityRun { model: cfg.model_name().to_string(), mode, diffusion: model.diffusion.clone(), options, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub epsilon: f64,
    pub horizon: f64,
    pub config: TruncationConfig,
    pub truncated_size: f64,
    pub premise_holds: bool,
    /// Sup distance between the truncated solution and the direct errors.
    pub max_difference: f64,
    pub samples: usize,
    /// Smallest constant in the remainder bound over the samples.
    pub remainder_constant: f64,
}

pub fn run_truncation(
    cfg: &ExperimentConfig,
    delta0: f64,
    samples: usize,
) -> Result<Vec<Result<TruncationRow, String>>, RunError> {
    let model = cfg.model_spec()?;
    let rows = cfg
        .eps_list
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let run = || -> Result<TruncationRow, RunError> {
                let scfg = cfg.solver_config(cfg.horizon(eps));
                let solved = solve_all(&model, eps, &scfg)?;
                let fit = fit_psi_decay(&solved.psi)?;
                let tcfg = TruncationConfig::from_psi_fit(eps, delta0, &fit)?;
                let trunc = simulate_truncated(&model, &solved.shadow, &solved.psi, &tcfg)?;
                let removal = removal_check(&trunc, &solved.full, &solved.shadow, &solved.psi, &tcfg)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let drawn = sample_remainder(&model, &solved.shadow, &solved.psi, &tcfg, samples, &mut rng)?;
                Ok(TruncationRow {
                    epsilon: eps,
                    horizon: scfg.t_end,
                    config: tcfg,
                    truncated_size: removal.truncated_size,
                    premise_holds: removal.premise_holds,
                    max_difference: removal.max_difference,
                    samples: drawn.len(),
                    remainder_constant: fit_remainder_constant(&drawn),
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    Ok(rows)
}
