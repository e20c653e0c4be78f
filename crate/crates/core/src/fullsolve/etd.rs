use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_epsilon, FullState, FullTrajectory, SolverConfig, SolverError, StepSchedule};
use crate::basis::{SpectralField, SpectralGrid};
use crate::expr::ExprError;
use crate::model::{CompiledModel, ModelSpec};

/// One exponential-Euler step for a single scalar component.
///
/// Diffusing components live in modal space; non-diffusing ones are stepped
/// nodally by explicit Euler, which is what ETD1 reduces to when the
/// semigroup is the identity.
pub(crate) struct ComponentStepper {
    diffusing: bool,
    dt: f64,
    decay: Vec<f64>,
    phi: Vec<f64>,
}

impl ComponentStepper {
    pub(crate) fn new(grid: &SpectralGrid, diffusion: f64, dt: f64) -> Self {
        ComponentStepper {
            diffusing: diffusion > 0.0,
            dt,
            decay: grid.decay_factors(diffusion, dt),
            phi: grid.phi1_weights(diffusion, dt),
        }
    }

    /// Advances `(nodal, modal)` by one step under nodal forcing. `modal`
    /// is only read and written for diffusing components. With `pin_mean`
    /// the zeroth mode is held at zero.
    pub(crate) fn step(
        &self,
        grid: &SpectralGrid,
        nodal: &mut [f64],
        modal: &mut [f64],
        forcing: &[f64],
        scratch: &mut [f64],
        pin_mean: bool,
    ) {
        if !self.diffusing && !pin_mean {
            for (z, h) in nodal.iter_mut().zip(forcing) {
                *z += self.dt * h;
            }
            return;
        }
        grid.analyze_into(forcing, scratch);
        for j in 0..modal.len() {
            modal[j] = self.decay[j] * modal[j] + self.phi[j] * scratch[j];
        }
        if pin_mean {
            modal[0] = 0.0;
        }
        grid.synthesize_into(modal, nodal);
    }
}

/// Coarse and (when the schedule refines the layer) fine steppers for one
/// component.
pub(crate) struct SteppedComponent {
    coarse: ComponentStepper,
    fine: Option<ComponentStepper>,
}

impl SteppedComponent {
    pub(crate) fn new(grid: &SpectralGrid, diffusion: f64, schedule: &StepSchedule) -> Self {
        SteppedComponent {
            coarse: ComponentStepper::new(grid, diffusion, schedule.dt()),
            fine: (schedule.substeps > 1)
                .then(|| ComponentStepper::new(grid, diffusion, schedule.fine_dt())),
        }
    }

    pub(crate) fn get(&self, fine: bool) -> &ComponentStepper {
        match (&self.fine, fine) {
            (Some(s), true) => s,
            _ => &self.coarse,
        }
    }
}

/// Evaluates `f` and `g` at every node. `v` gives the v-value per node.
pub(crate) fn evaluate_reaction(
    model: &CompiledModel,
    nodes: &[f64],
    t: f64,
    u: &[Vec<f64>],
    v: impl Fn(usize) -> f64,
    slots: &mut [f64],
    f_out: &mut [Vec<f64>],
    g_out: &mut [f64],
) -> Result<(), ExprError> {
    let mut fk = vec![0.0; model.m()];
    for (k, &x) in nodes.iter().enumerate() {
        CompiledModel::fill_slots(slots, x, t, v(k), u.iter().map(|ui| ui[k]));
        g_out[k] = model.reaction(slots, &mut fk)?;
        for (fi, val) in f_out.iter_mut().zip(&fk) {
            fi[k] = *val;
        }
    }
    Ok(())
}

pub(crate) fn check_values<'a>(
    values: impl IntoIterator<Item = &'a [f64]>,
    t: f64,
    threshold: f64,
) -> Result<(), SolverError> {
    for slice in values {
        for z in slice {
            if !z.is_finite() {
                return Err(SolverError::NonFinite { t });
            }
            if z.abs() > threshold {
                return Err(SolverError::BlowUp { t });
            }
        }
    }
    Ok(())
}

pub(crate) fn snapshot(grid: &Arc<SpectralGrid>, t: f64, u: &[Vec<f64>], v: &[f64]) -> FullState {
    let field = |z: &[f64]| SpectralField::from_nodal(grid, z.to_vec()).expect("grid-sized buffer");
    FullState { t, u: u.iter().map(|ui| field(ui)).collect(), v: field(v) }
}

/// Integrates the full system with exponential Euler, the nonlinearity
/// frozen at the start of each step, on the grid
/// [`StepSchedule::for_epsilon`], storing every step.
pub fn integrate_full(
    model: &ModelSpec,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<FullTrajectory, SolverError> {
    check_epsilon(epsilon)?;
    cfg.validate()?;
    let model = model.compile()?;
    let grid = cfg.grid()?;
    let n = grid.len();
    let m = model.m();
    let data = model.initial_data(&grid)?;

    let schedule = StepSchedule::for_epsilon(cfg, epsilon);
    let u_steppers: Vec<_> =
        model.diffusion().iter().map(|&d| SteppedComponent::new(&grid, d, &schedule)).collect();
    let v_stepper = SteppedComponent::new(&grid, 1.0 / epsilon, &schedule);

    let mut u = data.u;
    let mut v = data.v;
    let mut u_modal: Vec<Vec<f64>> = u.iter().map(|ui| grid.analyze(ui)).collect::<Result<_, _>>()?;
    let mut v_modal = grid.analyze(&v)?;
    check_values(u.iter().map(|x| x.as_slice()).chain([v.as_slice()]), 0.0, cfg.blowup_threshold)?;

    let times = schedule.times();
    let mut states = Vec::with_capacity(times.len());
    states.push(snapshot(&grid, 0.0, &u, &v));

    let mut slots = model.slot_buffer();
    let mut f = vec![vec![0.0; n]; m];
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for step in 0..schedule.len() {
        let t = times[step];
        let fine = schedule.is_fine(step);
        evaluate_reaction(&model, grid.nodes(), t, &u, |k| v[k], &mut slots, &mut f, &mut g)?;
        for i in 0..m {
            u_steppers[i].get(fine).step(&grid, &mut u[i], &mut u_modal[i], &f[i], &mut scratch, false);
        }
        v_stepper.get(fine).step(&grid, &mut v, &mut v_modal, &g, &mut scratch, false);

        let t_next = times[step + 1];
        check_values(u.iter().map(|x| x.as_slice()).chain([v.as_slice()]), t_next, cfg.blowup_threshold)?;
        states.push(snapshot(&grid, t_next, &u, &v));
    }
    Ok(FullTrajectory { epsilon, config: *cfg, schedule, times, states })
}
