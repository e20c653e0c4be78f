use alloc::vec::Vec;

use super::AnalysisError;
use crate::fullsolve::FullTrajectory;
use crate::shadow::{PsiTrajectory, ShadowTrajectory};

/// `U = u_eps - u` and `V = v_eps - v - psi` measured along a shared time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// `sup_x |U_i|` per time, per component.
    pub sup_u_components: Vec<Vec<f64>>,
    /// `max_i sup_x |U_i|`.
    pub sup_u: Vec<f64>,
    pub sup_v: Vec<f64>,
    /// `|<v_eps> - v|`.
    pub mean_gap: Vec<f64>,
    /// `sup_x |V - <V>|`.
    pub homog: Vec<f64>,
    /// `<v_eps>`.
    pub mean_v: Vec<f64>,
}

fn series_max(s: &[f64]) -> f64 {
    s.iter().fold(0.0, |m: f64, x| m.max(*x))
}

impl ErrorSeries {
    pub fn max_sup_u(&self) -> f64 {
        series_max(&self.sup_u)
    }

    pub fn max_sup_v(&self) -> f64 {
        series_max(&self.sup_v)
    }

    pub fn max_mean_gap(&self) -> f64 {
        series_max(&self.mean_gap)
    }

    pub fn max_homog(&self) -> f64 {
        series_max(&self.homog)
    }
}

pub fn error_series(
    full: &FullTrajectory,
    shadow: &ShadowTrajectory,
    psi: &PsiTrajectory,
) -> Result<ErrorSeries, AnalysisError> {
    let k = full.times.len();
    if shadow.times.len() != k || psi.times.len() != k {
        return Err(AnalysisError::AxisMismatch("different numbers of time steps"));
    }
    let same_times = full
        .times
        .iter()
        .zip(&shadow.times)
        .zip(&psi.times)
        .all(|((a, b), c)| (a - b).abs() <= 1e-12 * a.abs().max(1.0) && (a - c).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_times {
        return Err(AnalysisError::AxisMismatch("time axes differ"));
    }
    let n = full.grid().len();
    if shadow.grid().len() != n || psi.psi[0].grid().len() != n {
        return Err(AnalysisError::AxisMismatch("grids differ"));
    }
    if full.states[0].u.len() != shadow.states[0].u.len() {
        return Err(AnalysisError::AxisMismatch("component counts differ"));
    }

    let mut out = ErrorSeries {
        epsilon: full.epsilon,
        times: full.times.clone(),
        sup_u_components: Vec::with_capacity(k),
        sup_u: Vec::with_capacity(k),
        sup_v: Vec::with_capacity(k),
        mean_gap: Vec::with_capacity(k),
        homog: Vec::with_capacity(k),
        mean_v: Vec::with_capacity(k),
    };
    let mut big_v = alloc::vec![0.0; n];
    for ((fs, ss), p) in full.states.iter().zip(&shadow.states).zip(&psi.psi) {
        let comps: Vec<f64> = fs
            .u
            .iter()
            .zip(&ss.u)
            .map(|(a, b)| {
                a.nodal().iter().zip(b.nodal().iter()).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
            })
            .collect();
        out.sup_u.push(series_max(&comps));
        out.sup_u_components.push(comps);

        let v = fs.v.nodal();
        let pn = p.nodal();
        for ((dst, ve), pk) in big_v.iter_mut().zip(v.iter()).zip(pn.iter()) {
            *dst = ve - ss.v - pk;
        }
        let mean_big_v = big_v.iter().sum::<f64>() / n as f64;
        out.sup_v.push(series_max(&big_v.iter().map(|z| z.abs()).collect::<Vec<_>>()));
        out.homog.push(big_v.iter().fold(0.0, |m: f64, z| m.max((z - mean_big_v).abs())));
        let mean_v = v.iter().sum::<f64>() / n as f64;
        out.mean_gap.push((mean_v - ss.v).abs());
        out.mean_v.push(mean_v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fullsolve::{integrate_full, SolverConfig};
    use crate::shadow::{correction_psi, integrate_shadow, integrate_shadow_for};
    use crate::zoo::builtin_model;
    use alloc::collections::BTreeMap;

    #[test]
    fn decoupled_heat_has_no_error() {
        let model = builtin_model("decoupled-heat", &BTreeMap::new()).unwrap();
        let cfg = SolverConfig { n: 32, dt: 1e-3, t_end: 0.5, ..SolverConfig::default() };
        for eps in [1.0, 1e-2] {
            let full = integrate_full(&model, eps, &cfg).unwrap();
            let shadow = integrate_shadow_for(&model, &cfg, eps).unwrap();
            let psi = correction_psi(&model, &shadow, eps, &cfg).unwrap();
            let e = error_series(&full, &shadow, &psi).unwrap();
            assert!(e.max_sup_u() < 1e-13 && e.max_sup_v() < 1e-13, "{} {}", e.max_sup_u(), e.max_sup_v());
            assert!(e.max_mean_gap() < 1e-13 && e.max_homog() < 1e-13);
        }
    }

    #[test]
    fn mismatched_axes_rejected() {
        let model = builtin_model("decoupled-heat", &BTreeMap::new()).unwrap();
        let cfg = SolverConfig { n: 16, dt: 1e-2, t_end: 0.2, ..SolverConfig::default() };
        let full = integrate_full(&model, 0.1, &cfg).unwrap();
        let shadow = integrate_shadow(&model, &SolverConfig { t_end: 0.3, ..cfg }).unwrap();
        let psi = correction_psi(&model, &shadow, 0.1, &cfg).unwrap();
        assert!(matches!(error_series(&full, &shadow, &psi), Err(AnalysisError::AxisMismatch(_))));
    }
}
