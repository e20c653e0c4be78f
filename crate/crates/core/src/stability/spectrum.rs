use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, Schur};

use super::{JacobianField, StabilityError};

pub type C64 = Complex<f64>;

/// Probes closer than this to a node eigenvalue of `A` are rejected.
pub const POLE_GUARD: f64 = 1e-8;
const SCAN_POINTS: usize = 4001;
const SEED_GRID: usize = 9;
const NEWTON_ITERS: usize = 80;
const ROOT_MERGE: f64 = 1e-7;
const RING_POLES: usize = 64;
const RING_RADII: [f64; 7] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 5e-2, 0.2];
const RING_ANGLES: usize = 8;

pub(crate) fn abs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Eigenvalues of a dense real matrix via the real Schur form.
pub fn eigenvalues(matrix: DMatrix<f64>) -> Result<Vec<C64>, StabilityError> {
    let n = matrix.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // The deflation test at machine epsilon can stall on clustered spectra.
    for tol in [1.0, 16.0, 256.0].map(|s| s * f64::EPSILON) {
        if let Some(schur) = Schur::try_new(matrix.clone(), tol, 1000 * n.max(10)) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(StabilityError::Eigen(n))
}

fn small_eigenvalues(a: &[f64], m: usize) -> Result<Vec<C64>, StabilityError> {
    match m {
        1 => Ok(vec![C64::new(a[0], 0.0)]),
        2 => {
            let (tr, det) = (a[0] + a[3], a[0] * a[3] - a[1] * a[2]);
            let disc = 0.25 * tr * tr - det;
            let half = 0.5 * tr;
            if disc >= 0.0 {
                let s = libm::sqrt(disc);
                Ok(vec![C64::new(half - s, 0.0), C64::new(half + s, 0.0)])
            } else {
                let s = libm::sqrt(-disc);
                Ok(vec![C64::new(half, -s), C64::new(half, s)])
            }
        }
        _ => eigenvalues(DMatrix::from_row_slice(m, m, a)),
    }
}

/// The node cloud `union_k sigma(A(x_k))` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaA {
    /// `m` eigenvalues per node, node-major.
    pub points: Vec<C64>,
    pub re_min: f64,
    pub re_max: f64,
    /// Largest distance between the spectra of neighbouring nodes: how far
    /// the finite cloud may sit from the closure it samples.
    pub fattening: f64,
}

pub fn sigma_a(jac: &JacobianField) -> Result<SigmaA, StabilityError> {
    jac.require_stationary()?;
    let m = jac.m();
    let mut points = Vec::with_capacity(jac.n() * m);
    for k in 0..jac.n() {
        points.extend(small_eigenvalues(jac.a(0, k), m)?);
    }
    let re_min = points.iter().fold(f64::INFINITY, |s, z| s.min(z.re));
    let re_max = points.iter().fold(f64::NEG_INFINITY, |s, z| s.max(z.re));
    let fattening = (1..jac.n())
        .map(|k| hausdorff(&points[(k - 1) * m..k * m], &points[k * m..(k + 1) * m]))
        .fold(0.0, f64::max);
    Ok(SigmaA { points, re_min, re_max, fattening })
}

/// Solves `M x = r` in place for a small complex system by Gaussian
/// elimination with partial pivoting. Returns false when singular.
fn solve_in_place(m: usize, mat: &mut [C64], rhs: &mut [C64]) -> bool {
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| abs(mat[i * m + col]).total_cmp(&abs(mat[j * m + col]))).unwrap();
        if abs(mat[pivot * m + col]) == 0.0 {
            return false;
        }
        if pivot != col {
            for j in 0..m {
                mat.swap(col * m + j, pivot * m + j);
            }
            rhs.swap(col, pivot);
        }
        let p = mat[col * m + col];
        for row in col + 1..m {
            let factor = mat[row * m + col] / p;
            for j in col..m {
                let sub = factor * mat[col * m + j];
                mat[row * m + j] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[row] -= sub;
        }
    }
    for row in (0..m).rev() {
        let mut s = rhs[row];
        for j in row + 1..m {
            s -= mat[row * m + j] * rhs[j];
        }
        rhs[row] = s / mat[row * m + row];
    }
    true
}

/// `H(lambda) = lambda - <D> - <C (lambda I - A)^{-1} B>` for a stationary
/// field with `D = 0`.
pub struct Characteristic<'a> {
    jac: &'a JacobianField,
    poles: Vec<C64>,
    mean_d: f64,
    mat: Vec<C64>,
    x: Vec<C64>,
}

impl<'a> Characteristic<'a> {
    pub fn new(jac: &'a JacobianField) -> Result<Self, StabilityError> {
        jac.require_stationary()?;
        let poles = sigma_a(jac)?.points;
        let m = jac.m();
        Ok(Characteristic { jac, poles, mean_d: jac.mean_d(0), mat: vec![C64::new(0.0, 0.0); m * m], x: vec![C64::new(0.0, 0.0); m] })
    }

    fn check_probe(&self, lambda: C64) -> Result<(), StabilityError> {
        if self.poles.iter().any(|p| abs(lambda - p) < POLE_GUARD) {
            Err(StabilityError::ProbeNearSigmaA { re: lambda.re, im: lambda.im })
        } else {
            Ok(())
        }
    }

    pub fn eval(&mut self, lambda: C64) -> Result<C64, StabilityError> {
        Ok(self.eval_with_derivative(lambda)?.0)
    }

    /// `(H, H')` with `H' = 1 + <C (lambda I - A)^{-2} B>`.
    pub fn eval_with_derivative(&mut self, lambda: C64) -> Result<(C64, C64), StabilityError> {
        self.check_probe(lambda)?;
        let m = self.jac.m();
        let n = self.jac.n();
        let mut resolvent = C64::new(0.0, 0.0);
        let mut second = C64::new(0.0, 0.0);
        for k in 0..n {
            let (a, b, c) = (self.jac.a(0, k), self.jac.b(0, k), self.jac.c(0, k));
            if m == 1 {
                let r = (lambda - a[0]).inv();
                resolvent += c[0] * b[0] * r;
                second += c[0] * b[0] * r * r;
                continue;
            }
            let fill = |mat: &mut [C64]| {
                for i in 0..m {
                    for j in 0..m {
                        let delta = if i == j { lambda } else { C64::new(0.0, 0.0) };
                        mat[i * m + j] = delta - a[i * m + j];
                    }
                }
            };
            fill(&mut self.mat);
            for (xi, bi) in self.x.iter_mut().zip(b) {
                *xi = C64::new(*bi, 0.0);
            }
            if !solve_in_place(m, &mut self.mat, &mut self.x) {
                return Err(StabilityError::ProbeNearSigmaA { re: lambda.re, im: lambda.im });
            }
            resolvent += c.iter().zip(&self.x).map(|(ci, xi)| xi * *ci).sum::<C64>();
            fill(&mut self.mat);
            if !solve_in_place(m, &mut self.mat, &mut self.x) {
                return Err(StabilityError::ProbeNearSigmaA { re: lambda.re, im: lambda.im });
            }
            second += c.iter().zip(&self.x).map(|(ci, xi)| xi * *ci).sum::<C64>();
        }
        let inv_n = 1.0 / n as f64;
        let h = lambda - self.mean_d - resolvent * inv_n;
        let dh = C64::new(1.0, 0.0) + second * inv_n;
        Ok((h, dh))
    }

    /// Newton iteration from `seed`; `None` when it leaves `|lambda| <= 2r`,
    /// hits a pole, or does not settle.
    fn newton(&mut self, seed: C64, radius: f64) -> Option<C64> {
        let mut z = seed;
        for _ in 0..NEWTON_ITERS {
            let (h, dh) = self.eval_with_derivative(z).ok()?;
            if abs(dh) == 0.0 {
                return None;
            }
            let step = h / dh;
            z -= step;
            if !(abs(z) <= 2.0 * radius) {
                return None;
            }
            if abs(step) <= 1e-14 * (1.0 + abs(z)) {
                break;
            }
        }
        let h = self.eval(z).ok()?;
        (abs(h) <= 1e-9 * (1.0 + abs(z))).then_some(z)
    }
}

/// Bound on the modulus of every eigenvalue of the shadow operator
/// (row-sum norm of its node discretization).
fn spectral_radius_bound(jac: &JacobianField) -> f64 {
    let m = jac.m();
    let mut r = 0.0f64;
    let mut c_sum = 0.0;
    for k in 0..jac.n() {
        let (a, b) = (jac.a(0, k), jac.b(0, k));
        for i in 0..m {
            let row: f64 = a[i * m..(i + 1) * m].iter().map(|z| z.abs()).sum();
            r = r.max(row + b[i].abs());
        }
        c_sum += jac.c(0, k).iter().map(|z| z.abs()).sum::<f64>();
    }
    r.max(c_sum / jac.n() as f64 + jac.mean_d(0).abs()) + 1.0
}

fn push_root(roots: &mut Vec<C64>, z: C64) {
    let z = if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) { C64::new(z.re, 0.0) } else { z };
    for candidate in [z, z.conj()] {
        if !roots.iter().any(|r| abs(r - candidate) <= ROOT_MERGE * (1.0 + abs(candidate))) {
            roots.push(candidate);
        }
        if candidate.im == 0.0 {
            break;
        }
    }
}

/// Eigenvalues of the mean Jacobian `[[<A>, <B>], [<C>, <D>]]`.
pub fn mean_jacobian_eigenvalues(jac: &JacobianField) -> Result<Vec<C64>, StabilityError> {
    jac.require_stationary()?;
    let m = jac.m();
    let n = jac.n() as f64;
    let mut mean = DMatrix::<f64>::zeros(m + 1, m + 1);
    for k in 0..jac.n() {
        let (a, b, c) = (jac.a(0, k), jac.b(0, k), jac.c(0, k));
        for i in 0..m {
            for j in 0..m {
                mean[(i, j)] += a[i * m + j] / n;
            }
            mean[(i, m)] += b[i] / n;
            mean[(m, i)] += c[i] / n;
        }
        mean[(m, m)] += jac.d(0, k) / n;
    }
    eigenvalues(mean)
}

/// Discrete part `Sigma` of the shadow operator spectrum: zeros of `H`
/// away from `sigma(A)`.
///
/// Real zeros come from a sign-change scan over `[-r, r]` refined by
/// bisection to 1e-10 and polished by Newton; complex zeros from Newton
/// started at the mean-Jacobian eigenvalues and on a grid over the disc
/// `|lambda| <= r` that bounds the spectrum, plus rings around distinct
/// poles, where zeros sitting next to a pole of small residue hide from
/// the coarse grid.
pub fn sigma_roots(jac: &JacobianField) -> Result<Vec<C64>, StabilityError> {
    let mut h = Characteristic::new(jac)?;
    let radius = spectral_radius_bound(jac);
    let mut roots = Vec::new();

    let real_h = |h: &mut Characteristic, s: f64| h.eval(C64::new(s, 0.0)).ok().map(|z| z.re);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..SCAN_POINTS {
        let s = -radius + 2.0 * radius * i as f64 / (SCAN_POINTS - 1) as f64;
        let Some(hs) = real_h(&mut h, s) else {
            prev = None;
            continue;
        };
        if hs == 0.0 {
            push_root(&mut roots, C64::new(s, 0.0));
        } else if let Some((p, hp)) = prev {
            if hp * hs < 0.0 {
                let (mut lo, mut hi, mut h_lo) = (p, s, hp);
                while hi - lo > 1e-10 * (1.0 + lo.abs()) {
                    let mid = 0.5 * (lo + hi);
                    match real_h(&mut h, mid) {
                        Some(hm) if hm * h_lo > 0.0 => (lo, h_lo) = (mid, hm),
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                let mid = 0.5 * (lo + hi);
                // A sign change across a pole leaves |H| large.
                if let Some(z) = h.newton(C64::new(mid, 0.0), radius) {
                    if (z.re - mid).abs() <= 1e-6 * (1.0 + mid.abs()) {
                        push_root(&mut roots, C64::new(z.re, 0.0));
                    }
                }
            }
        }
        prev = Some((s, hs));
    }

    let mut seeds = mean_jacobian_eigenvalues(jac)?;
    for i in 0..SEED_GRID {
        for j in 0..SEED_GRID {
            let re = -radius + 2.0 * radius * (i as f64 + 0.5) / SEED_GRID as f64;
            let im = radius * (j as f64 + 0.5) / SEED_GRID as f64;
            seeds.push(C64::new(re, im));
        }
    }
    let mut poles: Vec<C64> = Vec::new();
    for p in &h.poles {
        if p.im >= 0.0 && !poles.iter().any(|q| abs(q - p) <= 1e-12 * (1.0 + abs(*p))) {
            poles.push(*p);
        }
    }
    let stride = poles.len().div_ceil(RING_POLES).max(1);
    for p in poles.iter().step_by(stride) {
        for r in RING_RADII {
            for a in 0..RING_ANGLES {
                let theta = core::f64::consts::TAU * (a as f64 + 0.25) / RING_ANGLES as f64;
                seeds.push(p + C64::new(libm::cos(theta), libm::sin(theta)) * (r * (1.0 + abs(*p))));
            }
        }
    }
    for seed in seeds {
        if let Some(z) = h.newton(seed, radius) {
            push_root(&mut roots, z);
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// `sigma(A)` and `Sigma` for a stationary field without diffusion.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSpectrum {
    pub sigma_a: SigmaA,
    pub sigma: Vec<C64>,
    /// `max Re` over the node cloud and `Sigma`.
    pub spectral_bound: f64,
}

pub fn sigma_shadow(jac: &JacobianField, diffusion: &[f64]) -> Result<ShadowSpectrum, StabilityError> {
    check_diffusion(jac, diffusion)?;
    if let Some((index, &value)) = diffusion.iter().enumerate().find(|(_, d)| **d != 0.0) {
        return Err(StabilityError::DiffusingComponent { index, value });
    }
    let sigma_a = sigma_a(jac)?;
    let sigma = sigma_roots(jac)?;
    let spectral_bound = sigma.iter().fold(sigma_a.re_max, |s, z| s.max(z.re));
    Ok(ShadowSpectrum { sigma_a, sigma, spectral_bound })
}

pub(crate) fn check_diffusion(jac: &JacobianField, diffusion: &[f64]) -> Result<(), StabilityError> {
    if diffusion.len() != jac.m() {
        return Err(StabilityError::Shape("one diffusion coefficient per u-component is required"));
    }
    if diffusion.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(StabilityError::Shape("diffusion coefficients must be finite and non-negative"));
    }
    Ok(())
}

/// Node discretization of `D_0 Laplacian + L` as a dense `(mN+1)`-square
/// matrix. Unknowns are ordered `xi_1` component-major (`i * N + k`), then
/// the scalar `xi_2`.
pub fn operator_matrix(jac: &JacobianField, diffusion: &[f64]) -> Result<DMatrix<f64>, StabilityError> {
    jac.require_stationary()?;
    check_diffusion(jac, diffusion)?;
    let (m, n) = (jac.m(), jac.n());
    let size = m * n + 1;
    let mut out = DMatrix::<f64>::zeros(size, size);

    if diffusion.iter().any(|&d| d > 0.0) {
        let grid = jac.grid();
        let mut unit = vec![0.0; n];
        let mut modal = vec![0.0; n];
        let mut column = vec![0.0; n];
        for col in 0..n {
            unit.fill(0.0);
            unit[col] = 1.0;
            grid.analyze_into(&unit, &mut modal);
            for (c, lam) in modal.iter_mut().zip(grid.eigenvalues()) {
                *c *= -lam;
            }
            grid.synthesize_into(&modal, &mut column);
            for (i, &d) in diffusion.iter().enumerate() {
                if d > 0.0 {
                    for row in 0..n {
                        out[(i * n + row, i * n + col)] += d * column[row];
                    }
                }
            }
        }
    }

    let inv_n = 1.0 / n as f64;
    for k in 0..n {
        let (a, b, c) = (jac.a(0, k), jac.b(0, k), jac.c(0, k));
        for i in 0..m {
            for j in 0..m {
                out[(i * n + k, j * n + k)] += a[i * m + j];
            }
            out[(i * n + k, m * n)] = b[i];
            out[(m * n, i * n + k)] = c[i] * inv_n;
        }
    }
    out[(m * n, m * n)] = jac.mean_d(0);
    Ok(out)
}

pub fn operator_eigenvalues(jac: &JacobianField, diffusion: &[f64]) -> Result<Vec<C64>, StabilityError> {
    eigenvalues(operator_matrix(jac, diffusion)?)
}

/// Hausdorff distance between two finite point sets; zero when both are
/// empty and infinite when exactly one is.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let directed = |p: &[C64], q: &[C64]| {
        p.iter().map(|x| q.iter().map(|y| abs(x - y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SpectralGrid;
    use crate::model::JacobianBlocks;
    use alloc::sync::Arc;
    use proptest::prelude::*;

    fn constant(n: usize, a: f64, b: f64, c: f64, d: f64) -> JacobianField {
        let grid = SpectralGrid::new(n).unwrap();
        JacobianField::stationary(&grid, 1, |_, _, blk: &mut JacobianBlocks| {
            blk.a[0] = a;
            blk.b[0] = b;
            blk.c[0] = c;
            blk.d = d;
        })
        .unwrap()
    }

    fn two_by_two_eigs(a: f64, b: f64, c: f64, d: f64) -> Vec<C64> {
        small_eigenvalues(&[a, b, c, d], 2).unwrap()
    }

    #[test]
    fn sigma_a_examples() {
        let s = sigma_a(&constant(8, -1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(s.points.iter().all(|z| *z == C64::new(-1.0, 0.0)));
        assert_eq!((s.re_min, s.re_max, s.fattening), (-1.0, -1.0, 0.0));

        // A(x) = -1 - x fills [-2, -1] as N grows.
        for n in [16, 64, 256] {
            let grid = SpectralGrid::new(n).unwrap();
            let jac = JacobianField::stationary(&grid, 1, |_, x, blk| blk.a[0] = -1.0 - x).unwrap();
            let s = sigma_a(&jac).unwrap();
            let h = 1.0 / n as f64;
            assert!((s.re_min + 2.0 - 0.5 * h).abs() < 1e-12 && (s.re_max + 1.0 + 0.5 * h).abs() < 1e-12);
            assert!((s.fattening - h).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_coefficients_match_two_by_two() {
        for (a, b, c, d) in [(-1.0, 2.0, -3.0, 0.5), (-0.5, 1.0, 1.0, -2.0), (0.3, -2.0, 2.0, 0.1)] {
            let jac = constant(16, a, b, c, d);
            let roots = sigma_roots(&jac).unwrap();
            let want = two_by_two_eigs(a, b, c, d);
            assert!(hausdorff(&roots, &want) < 1e-9, "{roots:?} vs {want:?}");

            let dense = operator_eigenvalues(&jac, &[0.0]).unwrap();
            let mut expected = want.clone();
            expected.push(C64::new(a, 0.0));
            assert!(hausdorff(&dense, &expected) < 1e-8, "{dense:?}");
            let near_a = dense.iter().filter(|z| abs(*z - a) < 1e-8).count();
            assert_eq!(near_a, 15);
        }
    }

    #[test]
    fn linear_growth_operator() {
        let grid = SpectralGrid::new(64).unwrap();
        let jac = JacobianField::stationary(&grid, 1, |_, x, blk| {
            let w1 = libm::sqrt(2.0) * libm::cos(core::f64::consts::PI * x);
            blk.d = w1 + w1 * w1;
        })
        .unwrap();
        let spec = sigma_shadow(&jac, &[0.0]).unwrap();
        assert_eq!(spec.sigma.len(), 1);
        assert!(abs(spec.sigma[0] - 1.0) < 1e-12);
        assert!((spec.spectral_bound - 1.0).abs() < 1e-12);
        let dense = operator_eigenvalues(&jac, &[0.0]).unwrap();
        assert!(hausdorff(&dense, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]) < 1e-6);
    }

    #[test]
    fn zero_field() {
        let jac = constant(8, 0.0, 0.0, 0.0, 0.0);
        let dense = operator_matrix(&jac, &[0.0]).unwrap();
        assert_eq!(dense.amax(), 0.0);
        let eig = eigenvalues(dense).unwrap();
        assert!(eig.iter().all(|z| abs(*z) == 0.0));
    }

    #[test]
    fn probe_near_node_eigenvalue_rejected() {
        let jac = constant(8, -1.0, 1.0, 1.0, 0.0);
        let mut h = Characteristic::new(&jac).unwrap();
        assert!(matches!(h.eval(C64::new(-1.0 + 1e-9, 0.0)), Err(StabilityError::ProbeNearSigmaA { .. })));
        assert!(h.eval(C64::new(-1.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn diffusion_rejected_by_closed_form() {
        let jac = constant(8, -1.0, 1.0, 1.0, 0.0);
        assert!(matches!(sigma_shadow(&jac, &[0.5]), Err(StabilityError::DiffusingComponent { index: 0, .. })));
        assert!(matches!(sigma_shadow(&jac, &[0.5, 0.0]), Err(StabilityError::Shape(_))));
    }

    #[test]
    fn diffusion_in_operator_matrix() {
        // A = a with diffusion d and no coupling: a - d (pi j)^2 for j >= 0.
        let jac = constant(16, -0.5, 0.0, 0.0, 0.0);
        let eig = operator_eigenvalues(&jac, &[0.01]).unwrap();
        let grid = jac.grid();
        let mut want: Vec<C64> = grid.eigenvalues().iter().map(|l| C64::new(-0.5 - 0.01 * l, 0.0)).collect();
        want.push(C64::new(0.0, 0.0));
        assert!(hausdorff(&eig, &want) < 1e-10);
    }

    #[test]
    fn piecewise_two_component_decomposition() {
        let grid: Arc<SpectralGrid> = SpectralGrid::new(32).unwrap();
        let jac = JacobianField::stationary(&grid, 2, |_, x, blk| {
            let left = x < 0.5;
            blk.a.copy_from_slice(if left { &[-1.0, 0.7, -0.5, -2.0] } else { &[-3.0, 1.0, 0.0, -0.5] });
            blk.b.copy_from_slice(if left { &[1.0, 0.0] } else { &[0.5, 1.0] });
            blk.c.copy_from_slice(if left { &[-1.0, 0.5] } else { &[1.0, -2.0] });
            blk.d = if left { 0.2 } else { -1.0 };
        })
        .unwrap();
        let spec = sigma_shadow(&jac, &[0.0, 0.0]).unwrap();
        let mut predicted = spec.sigma_a.points.clone();
        predicted.extend(&spec.sigma);
        let dense = operator_eigenvalues(&jac, &[0.0, 0.0]).unwrap();
        assert!(hausdorff(&predicted, &dense) < 1e-8, "{:?} {:?}", spec.sigma, dense);
    }

    proptest! {
        #[test]
        fn characteristic_grows_like_lambda(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
            let jac = constant(8, a, b, c, d);
            let mut h = Characteristic::new(&jac).unwrap();
            let big = 1e8;
            let ratio = h.eval(C64::new(big, 0.0)).unwrap() / big;
            prop_assert!(abs(ratio - 1.0) < 1e-7);
        }

        #[test]
        fn hausdorff_is_symmetric_and_zero_on_self(xs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..10),
                                                 ys in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..10)) {
            let p: Vec<C64> = xs.iter().map(|(r, i)| C64::new(*r, *i)).collect();
            let q: Vec<C64> = ys.iter().map(|(r, i)| C64::new(*r, *i)).collect();
            prop_assert_eq!(hausdorff(&p, &p), 0.0);
            prop_assert_eq!(hausdorff(&p, &q), hausdorff(&q, &p));
        }
    }
}
