//! Time integration of the full system
//!
//! ```text
//! u_t - D u_xx   = f(u, v, x, t)
//! v_t - v_xx / e = g(u, v, x, t)
//! ```
//!
//! with homogeneous Neumann conditions on (0,1).

mod etd;
mod picard;

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::basis::{BasisError, SpectralField, SpectralGrid};
use crate::expr::ExprError;
use crate::model::ModelError;

pub use etd::integrate_full;
pub(crate) use etd::{check_values, evaluate_reaction, SteppedComponent};
pub use picard::{picard_solve, PicardSolution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("solution exceeded the blow-up threshold at t = {t}")]
    BlowUp { t: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("Picard iteration did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(&'static str),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("trajectory covers [0, {have}] but [0, {want}] is required")]
    HorizonMismatch { have: f64, want: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] ExprError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Etd1,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Mode (and node) count.
    pub n: usize,
    pub dt: f64,
    /// Horizon; rounded to a whole number of steps.
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub method: Method,
    /// Refine the time grid inside the initial layer of the fast species
    /// (see [`StepSchedule::for_epsilon`]).
    pub resolve_layer: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 128,
            dt: 1e-3,
            t_end: 1.0,
            blowup_threshold: 1e8,
            method: Method::Etd1,
            resolve_layer: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::Config("dt must be positive"));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(SolverError::Config("T must be finite and at least dt"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(SolverError::Config("blow-up threshold must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        let k = libm::round(self.t_end / self.dt) as usize;
        k.max(1)
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>, SolverError> {
        Ok(SpectralGrid::new(self.n)?)
    }
}

/// Layer window `t < LAYER_WINDOW * eps / lambda1`; `exp(-25)` is about 1e-11.
const LAYER_WINDOW: f64 = 25.0;
/// Substeps per layer time `eps / lambda1` inside the window.
const LAYER_RESOLUTION: f64 = 8.0;
const MAX_LAYER_SUBSTEPS: usize = 1 << 16;

/// The time grid shared by a full solve and the shadow/correction solves it
/// is compared against.
///
/// The first `layer_steps` steps of size `dt` are each split into
/// `substeps` equal parts; every grid point is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSchedule {
    dt_bits: u64,
    pub substeps: usize,
    pub layer_steps: usize,
    /// Number of `dt`-steps covering the horizon.
    pub steps: usize,
}

impl StepSchedule {
    pub fn uniform(cfg: &SolverConfig) -> Self {
        StepSchedule { dt_bits: cfg.dt.to_bits(), substeps: 1, layer_steps: 0, steps: cfg.steps() }
    }

    /// Grid resolving the initial layer of the fast species for this `eps`.
    ///
    /// The mean-free part of `v` relaxes on the time scale `eps / lambda1`.
    /// The semigroup factors capture that decay exactly, but the explicit
    /// coupling into other components would see the unrelaxed `v` for a
    /// whole step and leave an `O(dt)` error independent of `eps`. Steps
    /// starting before `25 eps / lambda1` are therefore refined to at most
    /// `eps / (8 lambda1)`.
    pub fn for_epsilon(cfg: &SolverConfig, epsilon: f64) -> Self {
        let mut schedule = Self::uniform(cfg);
        if !cfg.resolve_layer {
            return schedule;
        }
        let h = epsilon / (crate::math::LAMBDA1 * LAYER_RESOLUTION);
        let substeps = (libm::ceil(cfg.dt / h) as usize).clamp(1, MAX_LAYER_SUBSTEPS);
        if substeps > 1 {
            let window = LAYER_WINDOW * epsilon / crate::math::LAMBDA1;
            schedule.substeps = substeps;
            schedule.layer_steps = (libm::ceil(window / cfg.dt) as usize).min(schedule.steps);
        }
        schedule
    }

    pub fn dt(&self) -> f64 {
        f64::from_bits(self.dt_bits)
    }

    pub fn fine_dt(&self) -> f64 {
        self.dt() / self.substeps as f64
    }

    /// Number of integration steps.
    pub fn len(&self) -> usize {
        self.layer_steps * self.substeps + (self.steps - self.layer_steps)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start time of step `i`, or the end time for `i = len()`.
    pub fn time(&self, i: usize) -> f64 {
        let fine = self.layer_steps * self.substeps;
        if i <= fine {
            let (q, r) = (i / self.substeps, i % self.substeps);
            q as f64 * self.dt() + r as f64 * self.fine_dt()
        } else {
            (self.layer_steps + (i - fine)) as f64 * self.dt()
        }
    }

    /// True when step `i` is a refined layer step.
    pub fn is_fine(&self, i: usize) -> bool {
        self.substeps > 1 && i < self.layer_steps * self.substeps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.len()).map(|i| self.time(i)).collect()
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<(), SolverError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(SolverError::Epsilon(epsilon))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub t: f64,
    pub u: Vec<SpectralField>,
    pub v: SpectralField,
}

#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub epsilon: f64,
    pub config: SolverConfig,
    pub schedule: StepSchedule,
    pub times: Vec<f64>,
    pub states: Vec<FullState>,
}

impl FullTrajectory {
    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.states[0].v.grid()
    }
}
