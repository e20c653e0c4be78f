//! The shadow system, in which `v` collapses to its spatial mean:
//!
//! ```text
//! u_t - D u_xx = f(u, v, x, t)
//! v'(t)        = <g(u, v, ., t)>
//! ```
//!
//! together with the mean-value correction `psi`, which carries the initial
//! layer and the pointwise deviation of `g` from its mean.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{SpectralField, SpectralGrid};
use crate::fullsolve::{check_epsilon, SolverConfig, SolverError, StepSchedule};
use crate::fullsolve::{check_values, evaluate_reaction, SteppedComponent};
use crate::math;
use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowState {
    pub t: f64,
    pub u: Vec<SpectralField>,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub struct ShadowTrajectory {
    pub config: SolverConfig,
    pub schedule: StepSchedule,
    pub times: Vec<f64>,
    pub states: Vec<ShadowState>,
}

impl ShadowTrajectory {
    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.states[0].u[0].grid()
    }
}

#[derive(Debug, Clone)]
pub struct PsiTrajectory {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub psi: Vec<SpectralField>,
}

/// Fitted envelope `C_v0 exp(-lambda1 t / eps) + C_g eps` of `sup |psi|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiDecayFit {
    pub c_v0: f64,
    pub c_g: f64,
    pub lambda1_over_eps: f64,
    /// Largest pointwise misfit relative to the largest sample.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("samples end at t = {last} but must extend past 2 T(eps) = {need}")]
    LayerNotResolved { last: f64, need: f64 },
}

/// Integrates the shadow system on the uniform grid of `cfg`; `u` by
/// exponential Euler as in the full solver, `v` by explicit Euler on the
/// node-quadrature mean of `g`.
pub fn integrate_shadow(model: &ModelSpec, cfg: &SolverConfig) -> Result<ShadowTrajectory, SolverError> {
    integrate_shadow_on(model, cfg, StepSchedule::uniform(cfg))
}

/// As [`integrate_shadow`], on the grid a full solve at `epsilon` uses, so
/// the two trajectories can be compared step by step.
pub fn integrate_shadow_for(
    model: &ModelSpec,
    cfg: &SolverConfig,
    epsilon: f64,
) -> Result<ShadowTrajectory, SolverError> {
    check_epsilon(epsilon)?;
    integrate_shadow_on(model, cfg, StepSchedule::for_epsilon(cfg, epsilon))
}

fn integrate_shadow_on(
    model: &ModelSpec,
    cfg: &SolverConfig,
    schedule: StepSchedule,
) -> Result<ShadowTrajectory, SolverError> {
    cfg.validate()?;
    let model = model.compile()?;
    let grid = cfg.grid()?;
    let n = grid.len();
    let m = model.m();
    let data = model.initial_data(&grid)?;
    let steppers: Vec<_> =
        model.diffusion().iter().map(|&d| SteppedComponent::new(&grid, d, &schedule)).collect();

    let mut u = data.u;
    let mut u_modal: Vec<Vec<f64>> = u.iter().map(|ui| grid.analyze(ui)).collect::<Result<_, _>>()?;
    let mut v = data.v.iter().sum::<f64>() / n as f64;
    check_values(u.iter().map(|x| x.as_slice()).chain([[v].as_slice()]), 0.0, cfg.blowup_threshold)?;

    let snapshot = |t: f64, u: &[Vec<f64>], v: f64| ShadowState {
        t,
        u: u.iter()
            .map(|ui| SpectralField::from_nodal(&grid, ui.clone()).expect("grid-sized buffer"))
            .collect(),
        v,
    };
    let times = schedule.times();
    let mut states = Vec::with_capacity(times.len());
    states.push(snapshot(0.0, &u, v));

    let mut slots = model.slot_buffer();
    let mut f = vec![vec![0.0; n]; m];
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for step in 0..schedule.len() {
        let t = times[step];
        let fine = schedule.is_fine(step);
        let h = if fine { schedule.fine_dt() } else { schedule.dt() };
        evaluate_reaction(&model, grid.nodes(), t, &u, |_| v, &mut slots, &mut f, &mut g)?;
        for i in 0..m {
            steppers[i].get(fine).step(&grid, &mut u[i], &mut u_modal[i], &f[i], &mut scratch, false);
        }
        v += h * (g.iter().sum::<f64>() / n as f64);

        let t_next = times[step + 1];
        check_values(u.iter().map(|x| x.as_slice()).chain([[v].as_slice()]), t_next, cfg.blowup_threshold)?;
        states.push(snapshot(t_next, &u, v));
    }
    Ok(ShadowTrajectory { config: *cfg, schedule, times, states })
}

/// Solves `psi_t - psi_xx / eps = g - <g>` along the shadow trajectory with
/// `psi(0) = v0 - <v0>`, on the shadow's own time grid. `cfg` gives the
/// horizon the shadow must cover.
pub fn correction_psi(
    model: &ModelSpec,
    shadow: &ShadowTrajectory,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<PsiTrajectory, SolverError> {
    check_epsilon(epsilon)?;
    cfg.validate()?;
    let have = *shadow.times.last().expect("trajectory is non-empty");
    if have + 1e-9 * have.max(1.0) < cfg.t_end {
        return Err(SolverError::HorizonMismatch { have, want: cfg.t_end });
    }
    let schedule = shadow.schedule;
    let model = model.compile()?;
    let grid = Arc::clone(shadow.grid());
    let n = grid.len();
    let m = model.m();
    let stepper = SteppedComponent::new(&grid, 1.0 / epsilon, &schedule);

    let v0 = model.initial_data(&grid)?.v;
    let mut modal = grid.analyze(&v0)?;
    modal[0] = 0.0;
    let mut nodal = grid.synthesize(&modal)?;

    let times = shadow.times.clone();
    let mut psi = Vec::with_capacity(times.len());
    psi.push(SpectralField::from_nodal(&grid, nodal.clone())?);

    let mut slots = model.slot_buffer();
    let mut f = vec![vec![0.0; n]; m];
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut u: Vec<Vec<f64>> = vec![Vec::new(); m];
    for step in 0..schedule.len() {
        let state = &shadow.states[step];
        for (ui, field) in u.iter_mut().zip(&state.u) {
            *ui = field.nodal().into_owned();
        }
        evaluate_reaction(&model, grid.nodes(), state.t, &u, |_| state.v, &mut slots, &mut f, &mut g)?;
        stepper.get(schedule.is_fine(step)).step(&grid, &mut nodal, &mut modal, &g, &mut scratch, true);
        check_values([nodal.as_slice()], times[step + 1], cfg.blowup_threshold)?;
        psi.push(SpectralField::from_nodal(&grid, nodal.clone())?);
    }
    Ok(PsiTrajectory { epsilon, times, psi })
}

/// Time after which the initial layer has decayed to order `eps`:
/// `max(0, -eps log(||v0 - <v0>||_sup eps) / lambda1)`.
pub fn t_layer(epsilon: f64, v0_meanzero_supnorm: f64) -> f64 {
    let scale = v0_meanzero_supnorm * epsilon;
    if !(scale > 0.0) {
        return 0.0;
    }
    (-epsilon * math::log(scale) / math::LAMBDA1).max(0.0)
}

const MIN_FIT_SAMPLES: usize = 10;

/// Fits `sup_x |psi(x, t_k)| <= C_v0 e_k + C_g eps` with `e_k = exp(-lambda1 t_k / eps)`.
///
/// The fit is least squares over all stored steps subject to the model
/// dominating every sample, with both constants non-negative. For fixed
/// `C_v0` the optimal `C_g` is the unconstrained minimizer raised to the
/// smallest feasible value; the remaining one-dimensional problem is convex
/// and solved by golden-section search.
pub fn fit_psi_decay(psi: &PsiTrajectory) -> Result<PsiDecayFit, FitError> {
    let k = psi.times.len();
    if k < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples { need: MIN_FIT_SAMPLES, got: k });
    }
    let eps = psi.epsilon;
    let rate = math::LAMBDA1 / eps;
    let s: Vec<f64> = psi.psi.iter().map(|z| z.sup_norm()).collect();
    let e: Vec<f64> = psi.times.iter().map(|t| math::exp(-rate * t)).collect();

    let layer = t_layer(eps, s[0]);
    let last = psi.times[k - 1];
    if layer > 0.0 && last <= 2.0 * layer {
        return Err(FitError::LayerNotResolved { last, need: 2.0 * layer });
    }

    let s_max = s.iter().fold(0.0, |a: f64, b| a.max(*b));
    if s_max == 0.0 {
        return Ok(PsiDecayFit { c_v0: 0.0, c_g: 0.0, lambda1_over_eps: rate, residual: 0.0 });
    }

    let best_b = |a: f64| {
        let free = s.iter().zip(&e).map(|(sk, ek)| sk - a * ek).sum::<f64>() / (k as f64 * eps);
        let floor = s.iter().zip(&e).fold(0.0, |m: f64, (sk, ek)| m.max((sk - a * ek) / eps));
        free.max(floor)
    };
    let cost = |a: f64| {
        let b = best_b(a);
        s.iter()
            .zip(&e)
            .map(|(sk, ek)| {
                let r = a * ek + b * eps - sk;
                r * r
            })
            .sum::<f64>()
    };

    let mut hi = s_max.max(f64::MIN_POSITIVE);
    while cost(2.0 * hi) < cost(hi) {
        hi *= 2.0;
    }
    hi *= 2.0;
    let a = golden_section(cost, 0.0, hi);
    let b = best_b(a);
    let residual = s
        .iter()
        .zip(&e)
        .fold(0.0, |m: f64, (sk, ek)| m.max((a * ek + b * eps - sk).abs()))
        / s_max;
    Ok(PsiDecayFit { c_v0: a, c_g: b, lambda1_over_eps: rate, residual })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The minimizer may sit on the boundary a = 0.
    if f(0.0) <= f(mid) {
        0.0
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::builtin_model;
    use alloc::collections::BTreeMap;

    fn cfg(n: usize, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig { n, dt, t_end, ..SolverConfig::default() }
    }

    fn spec(f: &str, g: &str, u0: &str, v0: &str) -> ModelSpec {
        ModelSpec::parse(&[0.0], &[f], g, &[u0], v0, BTreeMap::new()).unwrap()
    }

    #[test]
    fn predator_prey_reaches_steady_state() {
        let model = builtin_model("predator-prey", &BTreeMap::new()).unwrap();
        let traj = integrate_shadow(&model, &cfg(32, 1e-3, 20.0)).unwrap();
        let end = traj.states.last().unwrap();
        assert!((end.u[0].mean() - 0.5).abs() < 1e-4, "{}", end.u[0].mean());
        assert!((end.v - 0.5).abs() < 1e-4, "{}", end.v);
    }

    #[test]
    fn logistic_closed_form() {
        let model = spec("0", "(1 - v)*v", "0", "0.1");
        // explicit Euler: dt = 1e-4 leaves a ~2e-5 global error
        let traj = integrate_shadow(&model, &cfg(8, 1e-5, 2.0)).unwrap();
        for state in traj.states.iter().step_by(10_000) {
            let exact = 0.1 * math::exp(state.t) / (1.0 - 0.1 + 0.1 * math::exp(state.t));
            assert!((state.v - exact).abs() < 1e-5, "t {}", state.t);
        }
    }

    #[test]
    fn frozen_component_without_reaction() {
        let model = spec("0", "0", "sqrt(2)*cos(pi*x)", "1");
        let traj = integrate_shadow(&model, &cfg(16, 1e-2, 1.0)).unwrap();
        let first = traj.states[0].u[0].nodal().into_owned();
        assert_eq!(traj.states.last().unwrap().u[0].nodal().as_ref(), first.as_slice());
    }

    #[test]
    fn psi_vanishes_for_constant_data_and_homogeneous_forcing() {
        let model = spec("-u1", "1 - v", "2", "3");
        let c = cfg(16, 1e-2, 1.0);
        let shadow = integrate_shadow(&model, &c).unwrap();
        let psi = correction_psi(&model, &shadow, 1e-2, &c).unwrap();
        assert!(psi.psi.iter().all(|z| z.sup_norm() < 1e-14));
        let fit = fit_psi_decay(&psi).unwrap();
        assert!(fit.c_v0 < 1e-12 && fit.c_g < 1e-10);
    }

    #[test]
    fn psi_pure_decay_mode() {
        let model = spec("0", "0", "0", "0.7 + sqrt(2)*cos(pi*x)");
        let eps = 0.1;
        let c = cfg(32, 1e-3, 0.1);
        let shadow = integrate_shadow(&model, &c).unwrap();
        let psi = correction_psi(&model, &shadow, eps, &c).unwrap();
        for (t, z) in psi.times.iter().zip(&psi.psi) {
            assert!(z.mean().abs() < 1e-14);
            let modal = z.modal();
            assert!((modal[1] - math::exp(-math::LAMBDA1 * t / eps)).abs() < 1e-10);
        }
        let fit = fit_psi_decay(&psi).unwrap();
        let node_sup = math::sqrt(2.0) * math::cos(math::PI / 64.0);
        assert!((fit.c_v0 - node_sup).abs() < 1e-6, "{fit:?}");
        assert!(fit.c_g < 1e-6 && fit.residual < 1e-6, "{fit:?}");
    }

    #[test]
    fn psi_requires_covering_shadow() {
        let model = spec("0", "0", "0", "1");
        let shadow = integrate_shadow(&model, &cfg(8, 1e-2, 0.5)).unwrap();
        assert!(matches!(
            correction_psi(&model, &shadow, 0.1, &cfg(8, 1e-2, 1.0)),
            Err(SolverError::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn layer_time_examples() {
        let eps = math::exp(-1.0);
        assert!((t_layer(eps, 1.0) - eps / math::LAMBDA1).abs() < 1e-15);
        assert_eq!(t_layer(0.5, 4.0), 0.0);
        assert_eq!(t_layer(0.1, 0.0), 0.0);
        let mut prev = f64::INFINITY;
        for k in 2..12 {
            let t = t_layer(math::pow(10.0, -(k as f64)), 1.0);
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn fit_rejects_short_or_unresolved_series() {
        let grid = SpectralGrid::new(8).unwrap();
        let w1 = SpectralField::mode(&grid, 1);
        let short = PsiTrajectory { epsilon: 0.1, times: vec![0.0; 5], psi: vec![w1.clone(); 5] };
        assert!(matches!(fit_psi_decay(&short), Err(FitError::TooFewSamples { .. })));
        let times: Vec<f64> = (0..10).map(|k| k as f64 * 1e-4).collect();
        let early = PsiTrajectory { epsilon: 0.01, times, psi: vec![w1; 10] };
        assert!(matches!(fit_psi_decay(&early), Err(FitError::LayerNotResolved { .. })));
    }
}
