use alloc::vec::Vec;

use super::AnalysisError;
use crate::math;

/// Least-squares power law `err = exp(intercept) * eps^slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub err_list: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Regresses `log err` on `log eps`. Points are sorted by decreasing `eps`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    for &(epsilon, error) in points {
        if !(epsilon > 0.0 && error > 0.0 && epsilon.is_finite() && error.is_finite()) {
            return Err(AnalysisError::NonPositive { epsilon, error });
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(AnalysisError::DuplicateEpsilon(w[0].0));
    }
    let xs: Vec<f64> = sorted.iter().map(|p| math::log(p.0)).collect();
    let ys: Vec<f64> = sorted.iter().map(|p| math::log(p.1)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        eps_list: sorted.iter().map(|p| p.0).collect(),
        err_list: sorted.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        r_squared,
    })
}

/// Time horizon `eps^(alpha - 1)` on which the long-time estimates are stated.
pub fn horizon(alpha: f64, epsilon: f64) -> f64 {
    math::pow(epsilon, alpha - 1.0)
}
