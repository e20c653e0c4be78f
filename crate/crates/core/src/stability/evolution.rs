use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dissipativity::ode_indices;
use super::jacobian::CoefficientSlice;
use super::spectrum::check_diffusion;
use super::{JacobianField, StabilityError};
use crate::math;

/// Fitted rates below `-GROWTH_TOL` count as growth.
pub const GROWTH_TOL: f64 = 1e-6;
const MAX_FIT_SAMPLES: usize = 200;
const BLOWUP_NORM: f64 = 1e150;

/// Which evolution system to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbedSystem {
    /// The full linearized shadow system `W`: `xi_1` with diffusion,
    /// mean-coupled scalar `xi_2`.
    Shadow,
    /// `U`: `psi' = A_0 psi` node by node.
    OdeSubsystem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeNorm {
    /// Max over nodes of the Euclidean norm over components (and `|xi_2|`).
    Sup,
    /// Node-quadrature `L2` over components, plus `xi_2^2`.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionOptions {
    pub probe_count: usize,
    pub t_probe: f64,
    pub dt: f64,
    pub norm: ProbeNorm,
    pub seed: u64,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        EvolutionOptions { probe_count: 8, t_probe: 10.0, dt: 1e-2, norm: ProbeNorm::Sup, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionFit {
    /// `min` over probes of the fitted decay rate.
    pub rate: f64,
    /// `max ||xi(t)|| / (e^{-rate (t-s)} ||xi(s)||)` over probes and pairs.
    pub c: f64,
    pub growth_detected: bool,
    pub probe_rates: Vec<f64>,
}

/// Least-squares decay rate through the origin over all sample pairs
/// `s <= t`: `log ||xi(t)|| - log ||xi(s)|| ~ -rate (t - s)`.
fn pair_rate(times: &[f64], logs: &[f64]) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let x = times[j] - times[i];
            sxy += x * (logs[j] - logs[i]);
            sxx += x * x;
        }
    }
    if sxx == 0.0 {
        0.0
    } else {
        -sxy / sxx
    }
}

fn pair_constant(times: &[f64], logs: &[f64], rate: f64) -> f64 {
    let mut c = 1.0f64;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            c = c.max(math::exp(logs[j] - logs[i] + rate * (times[j] - times[i])));
        }
    }
    c
}

struct Propagator<'a> {
    jac: &'a JacobianField,
    system: ProbedSystem,
    /// Components carried in the state.
    comps: Vec<usize>,
    diffusion: Vec<f64>,
    half_decay: Vec<Vec<f64>>,
    slices: [CoefficientSlice; 3],
    stages: [Vec<f64>; 4],
    tmp: Vec<f64>,
    modal: Vec<f64>,
}

impl<'a> Propagator<'a> {
    fn new(jac: &'a JacobianField, diffusion: &[f64], system: ProbedSystem, dt: f64) -> Self {
        let comps = match system {
            ProbedSystem::Shadow => (0..jac.m()).collect(),
            ProbedSystem::OdeSubsystem => ode_indices(diffusion),
        };
        let grid = jac.grid();
        let half_decay = diffusion.iter().map(|&d| grid.decay_factors(d, 0.5 * dt)).collect();
        let len = Self::state_len(jac.n(), comps.len(), system);
        Propagator {
            jac,
            system,
            comps,
            diffusion: diffusion.to_vec(),
            half_decay,
            slices: Default::default(),
            stages: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            tmp: vec![0.0; len],
            modal: vec![0.0; jac.n()],
        }
    }

    fn state_len(n: usize, comps: usize, system: ProbedSystem) -> usize {
        match system {
            ProbedSystem::Shadow => comps * n + 1,
            ProbedSystem::OdeSubsystem => comps * n,
        }
    }

    fn len(&self) -> usize {
        Self::state_len(self.jac.n(), self.comps.len(), self.system)
    }

    fn rhs(jac: &JacobianField, comps: &[usize], system: ProbedSystem, s: &CoefficientSlice, y: &[f64], out: &mut [f64]) {
        let (n, m) = (jac.n(), jac.m());
        let mm = m * m;
        for (p, &i) in comps.iter().enumerate() {
            for k in 0..n {
                let row = &s.a[k * mm + i * m..k * mm + (i + 1) * m];
                let mut acc: f64 = comps.iter().enumerate().map(|(q, &j)| row[j] * y[q * n + k]).sum();
                if system == ProbedSystem::Shadow {
                    acc += s.b[k * m + i] * y[m * n];
                }
                out[p * n + k] = acc;
            }
        }
        if system == ProbedSystem::Shadow {
            let xi2 = y[m * n];
            let coupling: f64 = (0..n).map(|k| (0..m).map(|i| s.c[k * m + i] * y[i * n + k]).sum::<f64>()).sum();
            let mean_d = s.d.iter().sum::<f64>() / n as f64;
            out[m * n] = (coupling + mean_d * xi2 * n as f64) / n as f64;
        }
    }

    fn half_diffusion(&mut self, y: &mut [f64]) {
        if self.system != ProbedSystem::Shadow {
            return;
        }
        let grid = self.jac.grid().clone();
        let n = grid.len();
        for (i, &d) in self.diffusion.iter().enumerate() {
            if d > 0.0 {
                let part = &mut y[i * n..(i + 1) * n];
                grid.analyze_into(part, &mut self.modal);
                for (c, e) in self.modal.iter_mut().zip(&self.half_decay[i]) {
                    *c *= e;
                }
                grid.synthesize_into(&self.modal, part);
            }
        }
    }

    /// One Strang step: half diffusion, RK4 on the reaction part, half
    /// diffusion.
    fn step(&mut self, t: f64, dt: f64, y: &mut [f64]) {
        self.half_diffusion(y);
        let stationary = self.jac.is_stationary();
        for (slot, tau) in [t, t + 0.5 * dt, t + dt].into_iter().enumerate() {
            if slot == 0 || !stationary {
                self.jac.interpolate_into(tau, &mut self.slices[slot]);
            }
        }
        let pick = |stage: usize| if stationary { 0 } else { [0, 1, 1, 2][stage] };
        let weights = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            let (done, rest) = self.stages.split_at_mut(stage);
            for (idx, v) in self.tmp.iter_mut().enumerate() {
                *v = y[idx] + if stage == 0 { 0.0 } else { weights[stage] * dt * done[stage - 1][idx] };
            }
            Self::rhs(self.jac, &self.comps, self.system, &self.slices[pick(stage)], &self.tmp, &mut rest[0]);
        }
        for (idx, v) in y.iter_mut().enumerate() {
            *v += dt / 6.0
                * (self.stages[0][idx] + 2.0 * self.stages[1][idx] + 2.0 * self.stages[2][idx] + self.stages[3][idx]);
        }
        self.half_diffusion(y);
    }

    fn norm(&self, y: &[f64], which: ProbeNorm) -> f64 {
        let n = self.jac.n();
        let p = self.comps.len();
        let node_sq = |k: usize| (0..p).map(|q| y[q * n + k] * y[q * n + k]).sum::<f64>();
        let scalar = if self.system == ProbedSystem::Shadow { y[p * n] } else { 0.0 };
        match which {
            ProbeNorm::Sup => {
                let field = (0..n).map(node_sq).fold(0.0, f64::max);
                math::sqrt(field).max(scalar.abs())
            }
            ProbeNorm::L2 => math::sqrt((0..n).map(node_sq).sum::<f64>() / n as f64 + scalar * scalar),
        }
    }

    /// Canonical probes (constants per component, the scalar alone, the
    /// first cosine mode per component) followed by seeded random fields
    /// with entries in [-1, 1].
    fn probes(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.jac.n();
        let p = self.comps.len();
        let len = self.len();
        let mut out = Vec::new();
        for q in 0..p {
            let mut y = vec![0.0; len];
            y[q * n..(q + 1) * n].fill(1.0);
            out.push(y);
        }
        if self.system == ProbedSystem::Shadow {
            let mut y = vec![0.0; len];
            y[p * n] = 1.0;
            out.push(y);
        }
        let mode = self.jac.grid().mode(1);
        for q in 0..p {
            let mut y = vec![0.0; len];
            y[q * n..(q + 1) * n].copy_from_slice(mode);
            out.push(y);
        }
        out.truncate(count);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < count {
            out.push((0..len).map(|_| rng.random_range(-1.0..=1.0)).collect());
        }
        out
    }
}

/// Propagates probes through the homogeneous linearized system over
/// `[0, t_probe]` and fits `||xi(t)|| <= C e^{-rate (t-s)} ||xi(s)||`.
pub fn estimate_evolution_constants(
    jac: &JacobianField,
    diffusion: &[f64],
    system: ProbedSystem,
    opts: &EvolutionOptions,
) -> Result<EvolutionFit, StabilityError> {
    check_diffusion(jac, diffusion)?;
    if opts.probe_count == 0 {
        return Err(StabilityError::BadProbe("probe_count must be positive"));
    }
    if !(opts.dt > 0.0 && opts.t_probe >= opts.dt && opts.t_probe.is_finite()) {
        return Err(StabilityError::BadProbe("need 0 < dt <= T_probe < inf"));
    }
    let mut prop = Propagator::new(jac, diffusion, system, opts.dt);
    if prop.comps.is_empty() && system == ProbedSystem::OdeSubsystem {
        return Err(StabilityError::EmptySubsystem);
    }
    let steps = libm::round(opts.t_probe / opts.dt) as usize;
    let stride = steps.div_ceil(MAX_FIT_SAMPLES).max(1);

    let mut fits = Vec::with_capacity(opts.probe_count);
    for mut y in prop.probes(opts.probe_count, opts.seed) {
        let mut times = vec![0.0];
        let mut logs = vec![math::log(prop.norm(&y, opts.norm))];
        for step in 0..steps {
            let t = step as f64 * opts.dt;
            prop.step(t, opts.dt, &mut y);
            if (step + 1) % stride == 0 || step + 1 == steps {
                let nrm = prop.norm(&y, opts.norm);
                if !(nrm.is_finite() && nrm < BLOWUP_NORM) {
                    break;
                }
                times.push(t + opts.dt);
                logs.push(if nrm > 0.0 { math::log(nrm) } else { f64::NEG_INFINITY });
            }
        }
        // A probe that hits zero decays arbitrarily fast; keep what precedes it.
        let keep = logs.iter().position(|l| !l.is_finite()).unwrap_or(logs.len());
        fits.push((times[..keep].to_vec(), logs[..keep].to_vec()));
    }

    let probe_rates: Vec<f64> = fits.iter().map(|(t, l)| pair_rate(t, l)).collect();
    let rate = probe_rates.iter().copied().fold(f64::INFINITY, f64::min);
    let c = fits.iter().map(|(t, l)| pair_constant(t, l, rate)).fold(1.0, f64::max);
    Ok(EvolutionFit { rate, c, growth_detected: rate < -GROWTH_TOL, probe_rates })
}
