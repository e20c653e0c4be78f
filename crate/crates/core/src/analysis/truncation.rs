use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::AnalysisError;
use crate::basis::SpectralField;
use crate::expr::ExprError;
use crate::fullsolve::{check_values, FullTrajectory, SolverError, SteppedComponent};
use crate::math::{self, LAMBDA1};
use crate::model::{CompiledModel, JacobianBlocks, ModelSpec};
use crate::shadow::{PsiDecayFit, PsiTrajectory, ShadowTrajectory};

/// Parameters of the cut-off applied to the nonlinear remainder of the
/// error system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub epsilon: f64,
    /// Exponent of the clamp radius `eps^delta0`, in (0, 1/2].
    pub delta0: f64,
    /// Plateau half-width of `rho`.
    pub l: f64,
}

impl TruncationConfig {
    pub fn new(epsilon: f64, delta0: f64, l: f64) -> Result<Self, AnalysisError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(SolverError::Epsilon(epsilon).into());
        }
        if !(delta0 > 0.0 && delta0 <= 0.5) {
            return Err(AnalysisError::BadDelta(delta0));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(AnalysisError::BadRadius(l));
        }
        Ok(TruncationConfig { epsilon, delta0, l })
    }

    /// `L = C_v0 + 2` with `C_v0` from the decay fit of the same run.
    pub fn from_psi_fit(epsilon: f64, delta0: f64, fit: &PsiDecayFit) -> Result<Self, AnalysisError> {
        Self::new(epsilon, delta0, fit.c_v0 + 2.0)
    }

    /// `eps^delta0`.
    pub fn radius(&self) -> f64 {
        math::pow(self.epsilon, self.delta0)
    }

    /// `-eps ln(eps) / lambda1`, zero for `eps >= 1`.
    pub fn layer_time(&self) -> f64 {
        if self.epsilon >= 1.0 {
            0.0
        } else {
            -self.epsilon * math::log(self.epsilon) / LAMBDA1
        }
    }

    /// `rho(2 lambda1 t / (-eps ln eps))`; the argument is infinite for
    /// `eps >= 1`.
    pub fn time_weight(&self, t: f64) -> f64 {
        if self.epsilon >= 1.0 {
            return 0.0;
        }
        cutoff_rho(2.0 * t / self.layer_time(), self.l)
    }

    /// Right-hand side of the remainder bound up to its constant:
    /// `eps^(2 delta0) + 1{t <= layer_time} min(1, |zbar|)`.
    pub fn envelope(&self, t: f64, zbar: f64) -> f64 {
        let r = self.radius();
        let window = if t <= self.layer_time() { zbar.abs().min(1.0) } else { 0.0 };
        r * r + window
    }
}

/// Clamp of `z` to `[-eps^delta0, eps^delta0]`.
pub fn cutoff_theta(z: f64, cfg: &TruncationConfig) -> f64 {
    let r = cfg.radius();
    z.clamp(-r, r)
}

/// Even cut-off: 1 on `|z| <= l`, 0 on `|z| >= 2l`, quintic smoothstep
/// in between.
pub fn cutoff_rho(z: f64, l: f64) -> f64 {
    let a = z.abs();
    if a <= l {
        1.0
    } else if a >= 2.0 * l || !a.is_finite() {
        0.0
    } else {
        let s = (a - l) / l;
        1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

/// How the nonlinear remainder enters the linearized error system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Remainder {
    /// The cut-off remainder `H_eps`.
    Truncated,
    /// The exact second-order remainder, no cut-off.
    Exact,
    /// Dropped; the system is purely linear.
    Zero,
}

/// Scratch space for evaluating the remainder of one model.
pub struct RemainderContext {
    model: CompiledModel,
    slots: Vec<f64>,
    jac: JacobianBlocks,
    base: Vec<f64>,
    shifted: Vec<f64>,
    clamped: Vec<f64>,
    out: Vec<f64>,
}

impl RemainderContext {
    pub fn new(model: &ModelSpec) -> Result<Self, AnalysisError> {
        let model = model.compile().map_err(SolverError::from)?;
        Ok(Self::from_compiled(model))
    }

    fn from_compiled(model: CompiledModel) -> Self {
        let m = model.m();
        RemainderContext {
            slots: model.slot_buffer(),
            jac: JacobianBlocks::zeros(m),
            base: vec![0.0; m + 1],
            shifted: vec![0.0; m + 1],
            clamped: vec![0.0; m],
            out: vec![0.0; m + 1],
            model,
        }
    }

    pub fn m(&self) -> usize {
        self.model.m()
    }

    /// `h(u + y, v + zbar) - h(u, v) - J (y, zbar)` with `J` at `(u, v)`.
    /// The result is `(f_1, ..., f_m, g)`.
    pub fn exact(&mut self, y: &[f64], zbar: f64, x: f64, t: f64, u: &[f64], v: f64) -> Result<&[f64], ExprError> {
        self.remainder_into_out(y, zbar, x, t, u, v)?;
        Ok(&self.out)
    }

    fn remainder_into_out(&mut self, y: &[f64], zbar: f64, x: f64, t: f64, u: &[f64], v: f64) -> Result<(), ExprError> {
        let m = self.m();
        CompiledModel::fill_slots(&mut self.slots, x, t, v, u.iter().copied());
        self.base[m] = self.model.reaction(&self.slots, &mut self.base[..m])?;
        self.model.jacobian(&self.slots, &mut self.jac)?;
        CompiledModel::fill_slots(&mut self.slots, x, t, v + zbar, u.iter().zip(y).map(|(a, b)| a + b));
        self.shifted[m] = self.model.reaction(&self.slots, &mut self.shifted[..m])?;

        let jac = &self.jac;
        for i in 0..m {
            let row = &jac.a[i * m..(i + 1) * m];
            let lin: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + jac.b[i] * zbar;
            self.out[i] = self.shifted[i] - self.base[i] - lin;
        }
        let lin: f64 = jac.c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + jac.d * zbar;
        self.out[m] = self.shifted[m] - self.base[m] - lin;
        Ok(())
    }

    /// The cut-off remainder `H_eps(y, z)` at one point, where `zbar = z + psi`.
    #[allow(clippy::too_many_arguments)]
    pub fn truncated(
        &mut self,
        y: &[f64],
        z: f64,
        x: f64,
        t: f64,
        u: &[f64],
        v: f64,
        psi: f64,
        cfg: &TruncationConfig,
    ) -> Result<&[f64], ExprError> {
        let zbar = z + psi;
        let r = cfg.radius();
        let weight_time = cfg.time_weight(t);
        let weight = cutoff_rho(zbar.abs() / (r * cfg.l), cfg.l) * (1.0 - weight_time)
            + cutoff_rho(zbar.abs() / cfg.l, cfg.l) * weight_time;
        let mut clamped = core::mem::take(&mut self.clamped);
        for (c, yi) in clamped.iter_mut().zip(y) {
            *c = cutoff_theta(*yi, cfg);
        }
        let result = self.remainder_into_out(&clamped, zbar, x, t, u, v);
        self.clamped = clamped;
        result?;
        for h in self.out.iter_mut() {
            *h *= weight;
        }
        Ok(&self.out)
    }
}

/// One-shot form of [`RemainderContext::truncated`].
#[allow(clippy::too_many_arguments)]
pub fn truncated_remainder(
    model: &ModelSpec,
    y: &[f64],
    z: f64,
    x: f64,
    t: f64,
    u: &[f64],
    v: f64,
    psi: f64,
    cfg: &TruncationConfig,
) -> Result<Vec<f64>, AnalysisError> {
    let mut ctx = RemainderContext::new(model)?;
    let out = ctx.truncated(y, z, x, t, u, v, psi, cfg).map_err(SolverError::from)?;
    Ok(out.to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    pub t: f64,
    pub alpha: Vec<SpectralField>,
    pub beta: SpectralField,
}

/// Solution `(alpha, beta)` of the linearized error system with a
/// remainder term, on the shadow's time grid.
#[derive(Debug, Clone)]
pub struct TruncatedTrajectory {
    pub epsilon: f64,
    pub remainder: Remainder,
    pub times: Vec<f64>,
    pub states: Vec<TruncatedState>,
}

fn check_shadow_psi(shadow: &ShadowTrajectory, psi: &PsiTrajectory) -> Result<(), AnalysisError> {
    if shadow.times.len() != psi.times.len() {
        return Err(AnalysisError::AxisMismatch("different numbers of time steps"));
    }
    let same = shadow.times.iter().zip(&psi.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same {
        return Err(AnalysisError::AxisMismatch("time axes differ"));
    }
    if shadow.grid().len() != psi.psi[0].grid().len() {
        return Err(AnalysisError::AxisMismatch("grids differ"));
    }
    Ok(())
}

/// Integrates the cut-off error system from zero data with exponential
/// Euler on the shadow's time grid.
pub fn simulate_truncated(
    model: &ModelSpec,
    shadow: &ShadowTrajectory,
    psi: &PsiTrajectory,
    cfg: &TruncationConfig,
) -> Result<TruncatedTrajectory, AnalysisError> {
    simulate_linearized(model, shadow, psi, cfg, Remainder::Truncated)
}

/// As [`simulate_truncated`] with a choice of remainder.
///
/// The forcing is `J (alpha, beta + psi) + R` with `J` the Jacobian along
/// the shadow and `R` the selected remainder, frozen at the start of each
/// step.
pub fn simulate_linearized(
    model: &ModelSpec,
    shadow: &ShadowTrajectory,
    psi: &PsiTrajectory,
    cfg: &TruncationConfig,
    remainder: Remainder,
) -> Result<TruncatedTrajectory, AnalysisError> {
    check_shadow_psi(shadow, psi)?;
    if (psi.epsilon - cfg.epsilon).abs() > 1e-15 * cfg.epsilon {
        return Err(AnalysisError::AxisMismatch("correction and cut-off use different epsilon"));
    }
    let compiled = model.compile().map_err(SolverError::from)?;
    let m = compiled.m();
    if shadow.states[0].u.len() != m {
        return Err(AnalysisError::AxisMismatch("component counts differ"));
    }
    let grid = shadow.grid().clone();
    let n = grid.len();
    let schedule = shadow.schedule;
    let threshold = shadow.config.blowup_threshold;
    let alpha_steppers: Vec<_> =
        compiled.diffusion().iter().map(|&d| SteppedComponent::new(&grid, d, &schedule)).collect();
    let beta_stepper = SteppedComponent::new(&grid, 1.0 / cfg.epsilon, &schedule);
    let mut ctx = RemainderContext::from_compiled(compiled);

    let mut alpha = vec![vec![0.0; n]; m];
    let mut alpha_modal = vec![vec![0.0; n]; m];
    let mut beta = vec![0.0; n];
    let mut beta_modal = vec![0.0; n];
    let snapshot = |t: f64, alpha: &[Vec<f64>], beta: &[f64]| {
        let field = |z: &[f64]| SpectralField::from_nodal(&grid, z.to_vec()).expect("grid-sized buffer");
        TruncatedState { t, alpha: alpha.iter().map(|a| field(a)).collect(), beta: field(beta) }
    };
    let mut states = Vec::with_capacity(shadow.times.len());
    states.push(snapshot(0.0, &alpha, &beta));

    let mut f = vec![vec![0.0; n]; m];
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut u_node = vec![0.0; m];
    let mut y = vec![0.0; m];
    for step in 0..schedule.len() {
        let state = &shadow.states[step];
        let t = state.t;
        let u_nodal: Vec<_> = state.u.iter().map(|ui| ui.nodal()).collect();
        let psi_nodal = psi.psi[step].nodal();
        for (k, &x) in grid.nodes().iter().enumerate() {
            for i in 0..m {
                u_node[i] = u_nodal[i][k];
                y[i] = alpha[i][k];
            }
            let zbar = beta[k] + psi_nodal[k];
            let r = match remainder {
                Remainder::Truncated => {
                    ctx.truncated(&y, beta[k], x, t, &u_node, state.v, psi_nodal[k], cfg).map_err(SolverError::from)?
                }
                _ => ctx.exact(&y, zbar, x, t, &u_node, state.v).map_err(SolverError::from)?,
            };
            let keep = if remainder == Remainder::Zero { 0.0 } else { 1.0 };
            let rem: Vec<f64> = r.iter().map(|h| keep * h).collect();
            // The Jacobian is left in the context by the last evaluation.
            let jac = &ctx.jac;
            for i in 0..m {
                let row = &jac.a[i * m..(i + 1) * m];
                f[i][k] = row.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() + jac.b[i] * zbar + rem[i];
            }
            g[k] = jac.c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() + jac.d * zbar + rem[m];
        }
        let fine = schedule.is_fine(step);
        for i in 0..m {
            alpha_steppers[i].get(fine).step(&grid, &mut alpha[i], &mut alpha_modal[i], &f[i], &mut scratch, false);
        }
        beta_stepper.get(fine).step(&grid, &mut beta, &mut beta_modal, &g, &mut scratch, false);

        let t_next = shadow.times[step + 1];
        check_values(alpha.iter().map(|a| a.as_slice()).chain([beta.as_slice()]), t_next, threshold)?;
        states.push(snapshot(t_next, &alpha, &beta));
    }
    Ok(TruncatedTrajectory { epsilon: cfg.epsilon, remainder, times: shadow.times.clone(), states })
}

/// Outcome of checking whether the cut-off was inert along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalReport {
    /// `max_t (max_i sup|alpha_i| + sup|beta|)`.
    pub truncated_size: f64,
    /// `eps^delta0`.
    pub radius: f64,
    pub premise_holds: bool,
    /// `max_t max(sup|alpha - U|, sup|beta - V|)` against the direct errors.
    pub max_difference: f64,
}

/// Compares the truncated trajectory against the directly computed errors
/// `U = u_eps - u`, `V = v_eps - v - psi`.
pub fn removal_check(
    truncated: &TruncatedTrajectory,
    full: &FullTrajectory,
    shadow: &ShadowTrajectory,
    psi: &PsiTrajectory,
    cfg: &TruncationConfig,
) -> Result<RemovalReport, AnalysisError> {
    check_shadow_psi(shadow, psi)?;
    let k = truncated.times.len();
    if full.times.len() != k || shadow.times.len() != k {
        return Err(AnalysisError::AxisMismatch("different numbers of time steps"));
    }
    let same = truncated
        .times
        .iter()
        .zip(&full.times)
        .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same {
        return Err(AnalysisError::AxisMismatch("time axes differ"));
    }
    let sup = |z: &[f64]| z.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let sup_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));

    let mut size = 0.0f64;
    let mut diff = 0.0f64;
    let mut big_v = Vec::new();
    for (((ts, fs), ss), p) in truncated.states.iter().zip(&full.states).zip(&shadow.states).zip(&psi.psi) {
        let alpha_sup = ts.alpha.iter().fold(0.0, |m: f64, a| m.max(sup(&a.nodal())));
        size = size.max(alpha_sup + sup(&ts.beta.nodal()));
        for ((a, ue), us) in ts.alpha.iter().zip(&fs.u).zip(&ss.u) {
            let big_u: Vec<f64> = ue.nodal().iter().zip(us.nodal().iter()).map(|(x, y)| x - y).collect();
            diff = diff.max(sup_diff(&a.nodal(), &big_u));
        }
        big_v.clear();
        big_v.extend(fs.v.nodal().iter().zip(p.nodal().iter()).map(|(ve, pk)| ve - ss.v - pk));
        diff = diff.max(sup_diff(&ts.beta.nodal(), &big_v));
    }
    let radius = cfg.radius();
    Ok(RemovalReport { truncated_size: size, radius, premise_holds: size <= radius, max_difference: diff })
}

/// One random evaluation of the cut-off remainder along a shadow run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderSample {
    pub epsilon: f64,
    pub t: f64,
    pub x: f64,
    pub zbar: f64,
    /// `max` over components of `|H_eps|`.
    pub remainder: f64,
    /// [`TruncationConfig::envelope`] at this point.
    pub envelope: f64,
}

impl RemainderSample {
    pub fn ratio(&self) -> f64 {
        self.remainder / self.envelope
    }
}

/// Draws `count` points `(t, x)` from the stored shadow grid and small
/// perturbations `|y_i|, |z| <= 2 eps^delta0`, and evaluates the cut-off
/// remainder there.
pub fn sample_remainder<R: Rng + ?Sized>(
    model: &ModelSpec,
    shadow: &ShadowTrajectory,
    psi: &PsiTrajectory,
    cfg: &TruncationConfig,
    count: usize,
    rng: &mut R,
) -> Result<Vec<RemainderSample>, AnalysisError> {
    check_shadow_psi(shadow, psi)?;
    let mut ctx = RemainderContext::new(model)?;
    let m = ctx.m();
    let grid = shadow.grid();
    let spread = 2.0 * cfg.radius();
    let mut y = vec![0.0; m];
    let mut u = vec![0.0; m];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let step = rng.random_range(0..shadow.times.len());
        let k = rng.random_range(0..grid.len());
        let state = &shadow.states[step];
        for (ui, field) in u.iter_mut().zip(&state.u) {
            *ui = field.nodal()[k];
        }
        for yi in y.iter_mut() {
            *yi = rng.random_range(-spread..=spread);
        }
        let z = rng.random_range(-spread..=spread);
        let p = psi.psi[step].nodal()[k];
        let x = grid.nodes()[k];
        let h = ctx.truncated(&y, z, x, state.t, &u, state.v, p, cfg).map_err(SolverError::from)?;
        let remainder = h.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        out.push(RemainderSample {
            epsilon: cfg.epsilon,
            t: state.t,
            x,
            zbar: z + p,
            remainder,
            envelope: cfg.envelope(state.t, z + p),
        });
    }
    Ok(out)
}

/// Smallest constant `C` with `remainder <= C envelope` on every sample.
pub fn fit_remainder_constant(samples: &[RemainderSample]) -> f64 {
    samples.iter().fold(0.0, |c: f64, s| c.max(s.ratio()))
}
