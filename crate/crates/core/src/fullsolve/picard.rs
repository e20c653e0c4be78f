use alloc::vec;
use alloc::vec::Vec;

use super::etd::{check_values, evaluate_reaction, snapshot};
use super::{check_epsilon, FullTrajectory, SolverConfig, SolverError, StepSchedule};
use crate::model::ModelSpec;

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: FullTrajectory,
    pub iterations: usize,
    /// Sup over the space-time grid of the last update.
    pub residual: f64,
}

/// Fixed-point iteration of the Duhamel map
/// `Psi(t) = S(t) Psi0 + int_0^t S(t-s) h(Psi(s)) ds`
/// on the uniform time grid of `cfg`, starting from the free evolution
/// `S(t) Psi0`.
///
/// The time integral is the composite trapezoid rule with exact semigroup
/// factors, accumulated recursively:
/// `y_{n+1} = E (y_n + dt/2 h_n) + dt/2 h_{n+1}` per mode.
pub fn picard_solve(
    model: &ModelSpec,
    epsilon: f64,
    cfg: &SolverConfig,
    max_iter: usize,
    tol: f64,
) -> Result<PicardSolution, SolverError> {
    check_epsilon(epsilon)?;
    cfg.validate()?;
    let model = model.compile()?;
    let grid = cfg.grid()?;
    let n = grid.len();
    let m = model.m();
    let steps = cfg.steps();
    let dt = cfg.dt;
    let half = 0.5 * dt;

    // Component m is v.
    let diffusion: Vec<f64> = model.diffusion().iter().copied().chain([1.0 / epsilon]).collect();
    let decay: Vec<Vec<f64>> = diffusion.iter().map(|&d| grid.decay_factors(d, dt)).collect();
    let data = model.initial_data(&grid)?;
    let initial: Vec<Vec<f64>> = data.u.into_iter().chain([data.v]).collect();
    let initial_modal: Vec<Vec<f64>> = initial.iter().map(|z| grid.analyze(z)).collect::<Result<_, _>>()?;

    // iterate[n][i] = nodal values of component i at t_n
    let mut iterate: Vec<Vec<Vec<f64>>> = Vec::with_capacity(steps + 1);
    {
        let mut modal = initial_modal.clone();
        let mut nodal = initial.clone();
        iterate.push(initial.clone());
        for _ in 0..steps {
            for i in 0..=m {
                if diffusion[i] > 0.0 {
                    for (c, e) in modal[i].iter_mut().zip(&decay[i]) {
                        *c *= e;
                    }
                    grid.synthesize_into(&modal[i], &mut nodal[i]);
                }
            }
            iterate.push(nodal.clone());
        }
    }

    let mut slots = model.slot_buffer();
    let mut forcing: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; n]; m + 1]; steps + 1];
    let mut f = vec![vec![0.0; n]; m];
    let mut g = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        for (k, state) in iterate.iter().enumerate() {
            let t = k as f64 * dt;
            let v = &state[m];
            evaluate_reaction(&model, grid.nodes(), t, &state[..m], |j| v[j], &mut slots, &mut f, &mut g)?;
            for i in 0..m {
                if diffusion[i] > 0.0 {
                    grid.analyze_into(&f[i], &mut forcing[k][i]);
                } else {
                    forcing[k][i].copy_from_slice(&f[i]);
                }
            }
            grid.analyze_into(&g, &mut forcing[k][m]);
        }

        residual = 0.0;
        let mut y = vec![0.0; n];
        let mut nodal = vec![0.0; n];
        for i in 0..=m {
            let diffusing = diffusion[i] > 0.0;
            y.copy_from_slice(if diffusing { &initial_modal[i] } else { &initial[i] });
            for k in 0..steps {
                let (now, next) = (&forcing[k][i], &forcing[k + 1][i]);
                if diffusing {
                    for j in 0..n {
                        y[j] = decay[i][j] * (y[j] + half * now[j]) + half * next[j];
                    }
                    grid.synthesize_into(&y, &mut nodal);
                } else {
                    for j in 0..n {
                        y[j] += half * (now[j] + next[j]);
                    }
                    nodal.copy_from_slice(&y);
                }
                let slot = &mut iterate[k + 1][i];
                for (old, new) in slot.iter_mut().zip(&nodal) {
                    residual = residual.max((*old - new).abs());
                    *old = *new;
                }
            }
        }
        if !residual.is_finite() {
            return Err(SolverError::NonFinite { t: cfg.t_end });
        }
        if residual < tol {
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
            let mut states = Vec::with_capacity(steps + 1);
            for (k, state) in iterate.iter().enumerate() {
                check_values(state.iter().map(|z| z.as_slice()), times[k], cfg.blowup_threshold)?;
                states.push(snapshot(&grid, times[k], &state[..m], &state[m]));
            }
            return Ok(PicardSolution {
                trajectory: FullTrajectory { epsilon, config: *cfg, schedule: StepSchedule::uniform(cfg), times, states },
                iterations: iteration,
                residual,
            });
        }
    }
    Err(SolverError::NoConvergence { iters: max_iter, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use alloc::collections::BTreeMap;

    fn cfg(n: usize, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig { n, dt, t_end, ..SolverConfig::default() }
    }

    #[test]
    fn no_reaction_converges_in_one_iteration() {
        let model = ModelSpec::parse(&[0.5], &["0"], "0", &["sqrt(2)*cos(2*pi*x)"], "x", BTreeMap::new())
            .unwrap();
        let sol = picard_solve(&model, 0.1, &cfg(16, 1e-2, 0.3), 5, 1e-12).unwrap();
        assert_eq!(sol.iterations, 1);
        let end = sol.trajectory.states.last().unwrap();
        let want = math::exp(-4.0 * math::PI * math::PI * 0.5 * 0.3);
        assert!((end.u[0].modal()[2] - want).abs() < 1e-12);
    }

    #[test]
    fn scalar_exponential() {
        let model = ModelSpec::parse(&[0.0], &["0"], "v", &["0"], "1", BTreeMap::new()).unwrap();
        let sol = picard_solve(&model, 1e-2, &cfg(8, 1e-3, 0.5), 50, 1e-13).unwrap();
        for state in &sol.trajectory.states {
            let want = math::exp(state.t);
            assert!((state.v.nodal()[0] - want).abs() < 1e-5, "t {}", state.t);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let model = ModelSpec::parse(&[0.0], &["0"], "v", &["0"], "1", BTreeMap::new()).unwrap();
        let err = picard_solve(&model, 1e-2, &cfg(8, 1e-2, 1.0), 2, 1e-14).unwrap_err();
        assert!(matches!(err, SolverError::NoConvergence { iters: 2, .. }));
    }
}
