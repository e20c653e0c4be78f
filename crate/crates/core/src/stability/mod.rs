//! Linearized shadow system: Jacobian fields, the spectrum of the shadow
//! operator, dissipativity of the quadratic form and probed decay of the
//! evolution systems `W` and `U`.

mod dissipativity;
mod evolution;
mod jacobian;
mod spectrum;

use alloc::vec::Vec;

pub use dissipativity::{dissipativity_check, DissipativityVerdict, Subsystem, DISSIPATIVITY_TOL};
pub use evolution::{estimate_evolution_constants, EvolutionFit, EvolutionOptions, ProbeNorm, ProbedSystem, GROWTH_TOL};
pub use jacobian::{jacobian_at, jacobian_at_state, JacobianField, MAX_ENTRY};
pub use spectrum::{
    eigenvalues, hausdorff, mean_jacobian_eigenvalues, operator_eigenvalues, operator_matrix, sigma_a, sigma_roots,
    sigma_shadow, Characteristic, ShadowSpectrum, SigmaA, C64, POLE_GUARD,
};

use crate::fullsolve::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum StabilityError {
    #[error("Jacobian entry {value:e} at x = {x}, t = {t} exceeds the uniform bound")]
    Unbounded { t: f64, x: f64, value: f64 },
    #[error("probe point {re} + {im}i lies on the node spectrum of A")]
    ProbeNearSigmaA { re: f64, im: f64 },
    #[error("a stationary Jacobian is required, got {0} time samples")]
    NotStationary(usize),
    #[error("component {index} diffuses with coefficient {value}; the closed form needs D = 0")]
    DiffusingComponent { index: usize, value: f64 },
    #[error("eigenvalue iteration failed for a {0}-square matrix")]
    Eigen(usize),
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error("bad probe options: {0}")]
    BadProbe(&'static str),
    #[error("the ODE subsystem is empty: every component diffuses")]
    EmptySubsystem,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// `max Re` over `sigma(A)` and the roots of `H`.
    Decomposition,
    /// `max Re` of the dense operator matrix (diffusing components).
    OperatorMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub evolution: EvolutionOptions,
    /// Margin for the dissipativity checks; `kappa` is taken as zero.
    pub mu: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { evolution: EvolutionOptions::default(), mu: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub sigma_a: SigmaA,
    /// Roots of `H`; `None` when a component diffuses.
    pub sigma: Option<Vec<C64>>,
    pub spectral_bound: f64,
    pub bound_source: BoundSource,
    pub dissipative_full: DissipativityVerdict,
    pub dissipative_ode: DissipativityVerdict,
    pub evolution_fit: EvolutionFit,
    /// `None` when every component diffuses.
    pub ode_fit: Option<EvolutionFit>,
    /// Hausdorff distance between the dense-matrix eigenvalues and
    /// `sigma(A) + Sigma`; `None` when a component diffuses.
    pub oracle_gap: Option<f64>,
    /// Largest Jacobian entry in absolute value.
    pub sup_bound: f64,
}

/// Full pipeline. Spectral quantities use the field itself when it is
/// stationary and its last time slice otherwise; dissipativity and the
/// probes use every stored time.
pub fn stability_report(
    jac: &JacobianField,
    diffusion: &[f64],
    opts: &StabilityOptions,
) -> Result<StabilityReport, StabilityError> {
    spectrum::check_diffusion(jac, diffusion)?;
    let frozen;
    let spectral = if jac.is_stationary() {
        jac
    } else {
        frozen = jac.snapshot(jac.times().len() - 1);
        &frozen
    };

    let dense = operator_eigenvalues(spectral, diffusion)?;
    let (sigma_a, sigma, spectral_bound, bound_source, oracle_gap) = if diffusion.iter().all(|&d| d == 0.0) {
        let shadow = sigma_shadow(spectral, diffusion)?;
        let mut union = shadow.sigma_a.points.clone();
        union.extend_from_slice(&shadow.sigma);
        let gap = hausdorff(&dense, &union);
        (shadow.sigma_a, Some(shadow.sigma), shadow.spectral_bound, BoundSource::Decomposition, Some(gap))
    } else {
        let bound = dense.iter().fold(f64::NEG_INFINITY, |s, z| s.max(z.re));
        (sigma_a(spectral)?, None, bound, BoundSource::OperatorMatrix, None)
    };

    let dissipative_full = dissipativity_check(jac, diffusion, Subsystem::Full, opts.mu, |_| 0.0)?;
    let dissipative_ode = dissipativity_check(jac, diffusion, Subsystem::OdeOnly, opts.mu, |_| 0.0)?;
    let evolution_fit = estimate_evolution_constants(jac, diffusion, ProbedSystem::Shadow, &opts.evolution)?;
    let ode_fit = match estimate_evolution_constants(jac, diffusion, ProbedSystem::OdeSubsystem, &opts.evolution) {
        Ok(fit) => Some(fit),
        Err(StabilityError::EmptySubsystem) => None,
        Err(e) => return Err(e),
    };
    Ok(StabilityReport {
        sigma_a,
        sigma,
        spectral_bound,
        bound_source,
        dissipative_full,
        dissipative_ode,
        evolution_fit,
        ode_fit,
        oracle_gap,
        sup_bound: jac.sup_bound(),
    })
}
