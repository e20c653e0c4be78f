use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::spectrum::check_diffusion;
use super::{JacobianField, StabilityError};

/// Verdict threshold on the largest eigenvalue of the shifted form.
pub const DISSIPATIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// The full block `[[A, B], [C, D]]` of the linearized shadow system.
    Full,
    /// `A_0`: rows and columns of `A` for non-diffusing components.
    OdeOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityVerdict {
    pub subsystem: Subsystem,
    pub mu: f64,
    /// Trapezoid integral of `kappa` over the sampled times.
    pub kappa_integral: f64,
    /// `max_{x,t} lambda_max(sym M(x,t)) - (kappa(t) - mu)`; `-inf` for an
    /// empty subsystem.
    pub max_eigenvalue: f64,
    /// Time and node index where the maximum is attained.
    pub worst: Option<(f64, usize)>,
    pub dissipative: bool,
}

pub(crate) fn largest_symmetric_eigenvalue(m: &[f64], size: usize) -> Result<f64, StabilityError> {
    let sym = |i: usize, j: usize| 0.5 * (m[i * size + j] + m[j * size + i]);
    match size {
        0 => Ok(f64::NEG_INFINITY),
        1 => Ok(m[0]),
        2 => {
            let (p, q, r) = (sym(0, 0), sym(0, 1), sym(1, 1));
            Ok(0.5 * (p + r) + libm::hypot(0.5 * (p - r), q))
        }
        _ => {
            let s = DMatrix::from_fn(size, size, sym);
            let eig = SymmetricEigen::try_new(s, f64::EPSILON, 1000 * size).ok_or(StabilityError::Eigen(size))?;
            Ok(eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)))
        }
    }
}

/// Indices of non-diffusing components.
pub(crate) fn ode_indices(diffusion: &[f64]) -> Vec<usize> {
    diffusion.iter().enumerate().filter(|(_, d)| **d == 0.0).map(|(i, _)| i).collect()
}

/// Checks the pointwise quadratic-form condition
/// `y^T (M(x,t) - (kappa(t) - mu) I) y <= 0` on every node and time.
///
/// For [`Subsystem::Full`] the pointwise condition on `[[A, B], [C, D]]` is
/// sufficient for the integral form of the condition on the shadow
/// operator, since the scalar component is constant in space.
pub fn dissipativity_check(
    jac: &JacobianField,
    diffusion: &[f64],
    subsystem: Subsystem,
    mu: f64,
    kappa: impl Fn(f64) -> f64,
) -> Result<DissipativityVerdict, StabilityError> {
    check_diffusion(jac, diffusion)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(StabilityError::Shape("mu must be finite and non-negative"));
    }
    let m = jac.m();
    let rows: Vec<usize> = match subsystem {
        Subsystem::Full => (0..m).collect(),
        Subsystem::OdeOnly => ode_indices(diffusion),
    };
    let size = match subsystem {
        Subsystem::Full => m + 1,
        Subsystem::OdeOnly => rows.len(),
    };

    let times = jac.times();
    let kappa_integral = times.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (kappa(w[0]) + kappa(w[1]))).sum();
    let mut worst = None;
    let mut max_eigenvalue = f64::NEG_INFINITY;
    let mut buf = alloc::vec![0.0; size * size];
    if size > 0 {
        for (ti, &t) in times.iter().enumerate() {
            let shift = kappa(t) - mu;
            for k in 0..jac.n() {
                let a = jac.a(ti, k);
                for (p, &i) in rows.iter().enumerate() {
                    for (q, &j) in rows.iter().enumerate() {
                        buf[p * size + q] = a[i * m + j];
                    }
                }
                if subsystem == Subsystem::Full {
                    let (b, c) = (jac.b(ti, k), jac.c(ti, k));
                    for i in 0..m {
                        buf[i * size + m] = b[i];
                        buf[m * size + i] = c[i];
                    }
                    buf[m * size + m] = jac.d(ti, k);
                }
                let value = largest_symmetric_eigenvalue(&buf, size)? - shift;
                if value > max_eigenvalue {
                    max_eigenvalue = value;
                    worst = Some((t, k));
                }
            }
        }
    }
    Ok(DissipativityVerdict {
        subsystem,
        mu,
        kappa_integral,
        max_eigenvalue,
        worst,
        dissipative: max_eigenvalue <= DISSIPATIVITY_TOL,
    })
}
