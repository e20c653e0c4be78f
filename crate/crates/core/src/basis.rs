//! Neumann-Laplacian cosine basis on (0,1).
//!
//! Eigenfunctions are `w_0 = 1` and `w_j(x) = sqrt(2) cos(j pi x)` with
//! eigenvalues `(j pi)^2`. Fields are collocated at the midpoint nodes
//! `x_k = (2k+1)/(2N)`, where the cosines are exactly orthonormal under the
//! equal-weight quadrature `(1/N) sum_k`. The transforms are plain
//! `O(N^2)` matrix products against a precomputed table.

use alloc::borrow::Cow;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BasisError {
    #[error("mode count must be a power of two >= 8, got {0}")]
    BadModeCount(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("semigroup time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("diffusion must be non-negative, got {0}")]
    NegativeDiffusion(f64),
    #[error("field mean {0:e} is not zero")]
    NonzeroMean(f64),
    #[error("L^p exponent must be >= 1, got {0}")]
    BadExponent(f64),
}

#[derive(Debug)]
pub struct SpectralGrid {
    n: usize,
    nodes: Vec<f64>,
    eigenvalues: Vec<f64>,
    // w_j(x_k) at table[j * n + k]
    table: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Arc<Self>, BasisError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(BasisError::BadModeCount(n));
        }
        let nodes: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64 / (2 * n) as f64).collect();
        let eigenvalues = (0..n)
            .map(|j| {
                let s = j as f64 * math::PI;
                s * s
            })
            .collect();
        let sqrt2 = math::sqrt(2.0);
        let mut table = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                table[j * n + k] = if j == 0 {
                    1.0
                } else {
                    // Reduce the argument exactly in integers: j(2k+1) mod 4n.
                    let m = (j * (2 * k + 1)) % (4 * n);
                    sqrt2 * math::cos(math::PI * m as f64 / (2 * n) as f64)
                };
            }
        }
        Ok(Arc::new(SpectralGrid { n, nodes, eigenvalues, table }))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `w_j` sampled at the nodes.
    pub fn mode(&self, j: usize) -> &[f64] {
        &self.table[j * self.n..(j + 1) * self.n]
    }

    fn check_len(&self, got: usize) -> Result<(), BasisError> {
        if got == self.n {
            Ok(())
        } else {
            Err(BasisError::LengthMismatch { expected: self.n, got })
        }
    }

    /// Nodal values to modal coefficients: `c_j = (1/N) sum_k z(x_k) w_j(x_k)`.
    pub fn analyze(&self, nodal: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check_len(nodal.len())?;
        let mut out = vec![0.0; self.n];
        self.analyze_into(nodal, &mut out);
        Ok(out)
    }

    /// Modal coefficients to nodal values: `z(x_k) = sum_j c_j w_j(x_k)`.
    pub fn synthesize(&self, modal: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check_len(modal.len())?;
        let mut out = vec![0.0; self.n];
        self.synthesize_into(modal, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`analyze`](Self::analyze) for solver inner loops.
    pub fn analyze_into(&self, nodal: &[f64], modal: &mut [f64]) {
        let n = self.n;
        let inv = 1.0 / n as f64;
        for (j, c) in modal.iter_mut().enumerate() {
            let row = &self.table[j * n..(j + 1) * n];
            *c = row.iter().zip(nodal).map(|(w, z)| w * z).sum::<f64>() * inv;
        }
    }

    /// Unchecked variant of [`synthesize`](Self::synthesize).
    pub fn synthesize_into(&self, modal: &[f64], nodal: &mut [f64]) {
        let n = self.n;
        nodal.iter_mut().for_each(|z| *z = 0.0);
        for (j, c) in modal.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let row = &self.table[j * n..(j + 1) * n];
            for (z, w) in nodal.iter_mut().zip(row) {
                *z += c * w;
            }
        }
    }

    /// Per-mode semigroup factors `exp(-lambda_j d tau)`.
    pub fn decay_factors(&self, diffusion: f64, tau: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| math::exp(-l * diffusion * tau)).collect()
    }

    /// Per-mode exact Duhamel weights for forcing held constant over `dt`.
    pub fn phi1_weights(&self, diffusion: f64, dt: f64) -> Vec<f64> {
        phi1_weights(diffusion, &self.eigenvalues, dt)
    }
}

/// `phi_j = (1 - exp(-lambda_j d dt)) / (lambda_j d)`, with the limit `dt`
/// once `lambda_j d dt < 1e-12`.
pub fn phi1_weights(diffusion: f64, eigenvalues: &[f64], dt: f64) -> Vec<f64> {
    eigenvalues
        .iter()
        .map(|l| {
            let rate = l * diffusion;
            if rate * dt < 1e-12 {
                dt
            } else {
                -math::expm1(-rate * dt) / rate
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Sup,
    L1,
    L2,
    Lp(f64),
}

/// Norm of nodal samples using the equal-weight node quadrature.
pub fn nodal_norm(nodal: &[f64], which: Norm) -> Result<f64, BasisError> {
    let n = nodal.len() as f64;
    Ok(match which {
        Norm::Sup => nodal.iter().fold(0.0, |m, z| m.max(z.abs())),
        Norm::L1 => nodal.iter().map(|z| z.abs()).sum::<f64>() / n,
        Norm::L2 => math::sqrt(nodal.iter().map(|z| z * z).sum::<f64>() / n),
        Norm::Lp(p) => {
            if !(p >= 1.0) {
                return Err(BasisError::BadExponent(p));
            }
            let scale = nodal.iter().fold(0.0, |m: f64, z| m.max(z.abs()));
            if scale == 0.0 {
                0.0
            } else {
                let s = nodal.iter().map(|z| math::pow(z.abs() / scale, p)).sum::<f64>() / n;
                scale * math::pow(s, 1.0 / p)
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Nodal,
    Modal,
}

/// A scalar function on (0,1) with one authoritative representation; the
/// other is derived on demand.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<SpectralGrid>,
    data: Vec<f64>,
    repr: Repr,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) && self.repr == other.repr && self.data == other.data
    }
}

impl SpectralField {
    pub fn from_nodal(grid: &Arc<SpectralGrid>, nodal: Vec<f64>) -> Result<Self, BasisError> {
        grid.check_len(nodal.len())?;
        Ok(SpectralField { grid: Arc::clone(grid), data: nodal, repr: Repr::Nodal })
    }

    pub fn from_modal(grid: &Arc<SpectralGrid>, modal: Vec<f64>) -> Result<Self, BasisError> {
        grid.check_len(modal.len())?;
        Ok(SpectralField { grid: Arc::clone(grid), data: modal, repr: Repr::Modal })
    }

    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let nodal = grid.nodes().iter().map(|&x| f(x)).collect();
        SpectralField { grid: Arc::clone(grid), data: nodal, repr: Repr::Nodal }
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        SpectralField { grid: Arc::clone(grid), data: vec![0.0; grid.len()], repr: Repr::Modal }
    }

    /// The basis function `w_j`.
    pub fn mode(grid: &Arc<SpectralGrid>, j: usize) -> Self {
        let mut modal = vec![0.0; grid.len()];
        modal[j] = 1.0;
        SpectralField { grid: Arc::clone(grid), data: modal, repr: Repr::Modal }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn nodal(&self) -> Cow<'_, [f64]> {
        match self.repr {
            Repr::Nodal => Cow::Borrowed(&self.data),
            Repr::Modal => {
                let mut out = vec![0.0; self.grid.len()];
                self.grid.synthesize_into(&self.data, &mut out);
                Cow::Owned(out)
            }
        }
    }

    pub fn modal(&self) -> Cow<'_, [f64]> {
        match self.repr {
            Repr::Modal => Cow::Borrowed(&self.data),
            Repr::Nodal => {
                let mut out = vec![0.0; self.grid.len()];
                self.grid.analyze_into(&self.data, &mut out);
                Cow::Owned(out)
            }
        }
    }

    pub fn into_nodal(self) -> Self {
        match self.repr {
            Repr::Nodal => self,
            Repr::Modal => {
                let data = self.nodal().into_owned();
                SpectralField { grid: self.grid, data, repr: Repr::Nodal }
            }
        }
    }

    pub fn into_modal(self) -> Self {
        match self.repr {
            Repr::Modal => self,
            Repr::Nodal => {
                let data = self.modal().into_owned();
                SpectralField { grid: self.grid, data, repr: Repr::Modal }
            }
        }
    }

    /// Sums the cosine series at an arbitrary `x`, e.g. the boundary where
    /// a continuous sup-norm of a low mode is attained.
    pub fn eval(&self, x: f64) -> f64 {
        let modal = self.modal();
        let rest: f64 = modal.iter().enumerate().skip(1).map(|(j, c)| c * math::cos(math::PI * j as f64 * x)).sum();
        modal[0] + math::sqrt(2.0) * rest
    }

    /// Spatial mean; equals the zeroth modal coefficient since |Omega| = 1.
    pub fn mean(&self) -> f64 {
        match self.repr {
            Repr::Modal => self.data[0],
            Repr::Nodal => self.data.iter().sum::<f64>() / self.data.len() as f64,
        }
    }

    pub fn norm(&self, which: Norm) -> Result<f64, BasisError> {
        nodal_norm(&self.nodal(), which)
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodal().iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    /// `S(d tau) z`: multiplies mode `j` by `exp(-lambda_j d tau)`.
    pub fn semigroup_apply(&self, diffusion: f64, tau: f64) -> Result<Self, BasisError> {
        if !(tau >= 0.0) {
            return Err(BasisError::NegativeTime(tau));
        }
        if !(diffusion >= 0.0) {
            return Err(BasisError::NegativeDiffusion(diffusion));
        }
        if diffusion == 0.0 || tau == 0.0 {
            return Ok(self.clone());
        }
        let mut modal = self.modal().into_owned();
        for (c, l) in modal.iter_mut().zip(self.grid.eigenvalues()) {
            *c *= math::exp(-l * diffusion * tau);
        }
        Ok(SpectralField { grid: Arc::clone(&self.grid), data: modal, repr: Repr::Modal })
    }

    /// Returns `(||S(d tau) z||, exp(-lambda_1 d tau) ||z||)` for a mean-zero field.
    pub fn decay_check(&self, diffusion: f64, tau: f64, which: Norm) -> Result<(f64, f64), BasisError> {
        let mean = self.mean();
        if mean.abs() > 1e-10 {
            return Err(BasisError::NonzeroMean(mean));
        }
        let evolved = self.semigroup_apply(diffusion, tau)?;
        let bound = math::exp(-math::LAMBDA1 * diffusion * tau) * self.norm(which)?;
        Ok((evolved.norm(which)?, bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Arc<SpectralGrid> {
        SpectralGrid::new(n).unwrap()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn grid_construction() {
        assert!(matches!(SpectralGrid::new(4), Err(BasisError::BadModeCount(4))));
        assert!(matches!(SpectralGrid::new(12), Err(BasisError::BadModeCount(12))));
        let g = grid(16);
        assert_eq!(g.eigenvalues()[0], 0.0);
        assert!((g.eigenvalues()[1] - math::PI * math::PI).abs() < 1e-14);
        assert!(g.eigenvalues().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.nodes()[0], 1.0 / 32.0);
    }

    #[test]
    fn discrete_orthonormality() {
        let g = grid(32);
        for i in 0..32 {
            for j in 0..32 {
                let ip: f64 = g.mode(i).iter().zip(g.mode(j)).map(|(a, b)| a * b).sum::<f64>() / 32.0;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "<w{i},w{j}> = {ip}");
            }
        }
    }

    #[test]
    fn analyze_examples() {
        let g = grid(64);
        let ones = g.analyze(&vec![1.0; 64]).unwrap();
        assert!((ones[0] - 1.0).abs() < 1e-14);
        assert!(ones[1..].iter().all(|c| c.abs() < 1e-14));

        let w1: Vec<f64> = g.nodes().iter().map(|x| math::sqrt(2.0) * math::cos(math::PI * x)).collect();
        let c = g.analyze(&w1).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-12);
        assert!(c.iter().enumerate().all(|(j, v)| j == 1 || v.abs() < 1e-12));

        // 2cos^2(pi x) = 1 + cos(2 pi x) = w_0 + w_2 / sqrt(2)
        let sq: Vec<f64> = g.nodes().iter().map(|x| 2.0 * math::cos(math::PI * x).powi_(2)).collect();
        let c = g.analyze(&sq).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[2] - 1.0 / math::sqrt(2.0)).abs() < 1e-12);
        assert!(c.iter().enumerate().all(|(j, v)| j == 0 || j == 2 || v.abs() < 1e-12));
        assert!(sup_diff(&g.synthesize(&c).unwrap(), &sq) < 1e-12);

        assert!(matches!(g.analyze(&[1.0; 3]), Err(BasisError::LengthMismatch { .. })));
        assert!(matches!(g.synthesize(&[1.0; 65]), Err(BasisError::LengthMismatch { .. })));
    }

    trait Powi {
        fn powi_(self, k: i32) -> f64;
    }
    impl Powi for f64 {
        fn powi_(self, k: i32) -> f64 {
            (0..k).fold(1.0, |acc, _| acc * self)
        }
    }

    #[test]
    fn semigroup_examples() {
        let g = grid(64);
        let w1 = SpectralField::mode(&g, 1);
        let s = w1.semigroup_apply(1.0, 0.1).unwrap();
        let want = math::exp(-math::PI * math::PI / 10.0);
        assert!((s.modal()[1] - want).abs() < 1e-15);
        // sup over nodes of sqrt(2) cos(pi x_k) is attained at x_0
        let node_sup = math::sqrt(2.0) * math::cos(math::PI / 128.0) * want;
        assert!((s.sup_norm() - node_sup).abs() / node_sup < 1e-12);

        assert!((s.eval(0.0) - math::sqrt(2.0) * want).abs() < 1e-15);
        let z = SpectralField::from_fn(&g, |x| x * x - math::sin(3.0 * x));
        for (k, x) in g.nodes().iter().enumerate() {
            assert!((z.eval(*x) - z.nodal()[k]).abs() < 1e-12);
        }
        assert_eq!(z.semigroup_apply(2.0, 0.0).unwrap(), z);
        let mut only_mean = vec![0.0; 64];
        only_mean[0] = 5.0;
        let c = SpectralField::from_modal(&g, only_mean.clone()).unwrap();
        assert_eq!(c.semigroup_apply(3.0, 7.0).unwrap().modal().as_ref(), only_mean.as_slice());
        assert!(matches!(z.semigroup_apply(1.0, -1.0), Err(BasisError::NegativeTime(_))));
    }

    #[test]
    fn phi1_examples() {
        assert_eq!(phi1_weights(0.0, &[0.0, 5.0], 0.1), [0.1, 0.1]);
        let ln2 = core::f64::consts::LN_2;
        // lambda d dt = ln 2 with lambda d = 2, dt = ln2 / 2
        let w = phi1_weights(1.0, &[2.0], ln2 / 2.0);
        assert!((w[0] - 0.25).abs() < 1e-15);
        // Taylor oracle: phi = dt (1 - r dt / 2 + (r dt)^2 / 6 - ...), so
        // |phi - dt (1 - r dt / 2)| ~ (r dt)^2 dt / 6.
        let dt = 1e-2;
        for rate in [1e-3, 1e-2, 1e-1, 1.0] {
            let phi = phi1_weights(rate, &[1.0], dt)[0];
            let err = (phi - dt * (1.0 - rate * dt / 2.0)).abs();
            let scale = (rate * dt) * (rate * dt) * dt;
            assert!(err <= scale / 6.0 * 1.01 + 1e-18, "rate {rate}: {err} vs {scale}");
            assert!(err >= scale / 6.0 * 0.9, "rate {rate}: {err} vs {scale}");
        }
    }

    #[test]
    fn norm_examples() {
        let g = grid(128);
        let w1 = SpectralField::mode(&g, 1);
        let sup = w1.norm(Norm::Sup).unwrap();
        assert!((sup - math::sqrt(2.0)).abs() < 1e-3);
        assert!((w1.norm(Norm::L2).unwrap() - 1.0).abs() < 1e-12);
        let one = SpectralField::from_fn(&g, |_| 1.0);
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((one.norm(Norm::Lp(p)).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((one.norm(Norm::L1).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(one.norm(Norm::Lp(0.5)), Err(BasisError::BadExponent(_))));
    }

    #[test]
    fn decay_check_examples() {
        let g = grid(64);
        let w1 = SpectralField::mode(&g, 1);
        for which in [Norm::L2, Norm::Sup, Norm::Lp(3.0)] {
            let (lhs, bound) = w1.decay_check(0.5, 0.3, which).unwrap();
            assert!((lhs / bound - 1.0).abs() < 1e-12);
        }
        let mut m = vec![0.0; 64];
        m[1] = 1.0;
        m[3] = 1.0;
        let z = SpectralField::from_modal(&g, m).unwrap();
        for tau in [0.01, 0.1, 1.0] {
            let (lhs, bound) = z.decay_check(1.0, tau, Norm::L2).unwrap();
            // exact: sqrt(e^{-2 pi^2 tau} + e^{-18 pi^2 tau}) <= e^{-pi^2 tau} sqrt(2)
            let l1 = math::PI * math::PI;
            let exact = math::sqrt(math::exp(-2.0 * l1 * tau) + math::exp(-18.0 * l1 * tau));
            assert!((lhs - exact).abs() < 1e-14);
            assert!(lhs <= bound * (1.0 + 1e-14));
        }
        let w2 = SpectralField::mode(&g, 2);
        let (lhs, _) = w2.decay_check(1.0, 10.0, Norm::Sup).unwrap();
        assert!(lhs < 1e-100);
        let biased = SpectralField::from_fn(&g, |_| 1.0);
        assert!(matches!(biased.decay_check(1.0, 1.0, Norm::L2), Err(BasisError::NonzeroMean(_))));
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn transform_round_trip(nodal in field_strategy(32)) {
            let g = grid(32);
            let back = g.synthesize(&g.analyze(&nodal).unwrap()).unwrap();
            prop_assert!(sup_diff(&back, &nodal) < 1e-12);
            let f = SpectralField::from_nodal(&g, nodal.clone()).unwrap();
            prop_assert!((f.mean() - f.modal()[0]).abs() < 1e-13);
        }

        #[test]
        fn semigroup_laws(nodal in field_strategy(32), d in 0.0f64..5.0, s in 0.0f64..0.2, t in 0.0f64..0.2) {
            let g = grid(32);
            let z = SpectralField::from_nodal(&g, nodal).unwrap();
            let two = z.semigroup_apply(d, s).unwrap().semigroup_apply(d, t).unwrap();
            let one = z.semigroup_apply(d, s + t).unwrap();
            prop_assert!(sup_diff(&two.modal(), &one.modal()) < 1e-13);
            prop_assert_eq!(one.modal()[0], z.modal()[0]);
            // contraction in sup and L2 decay of the mean-zero part
            prop_assert!(one.sup_norm() <= z.sup_norm() * (1.0 + 1e-10));
            let mut centred = z.modal().into_owned();
            centred[0] = 0.0;
            let c = SpectralField::from_modal(&g, centred).unwrap();
            let (lhs, bound) = c.decay_check(d, s + t, Norm::L2).unwrap();
            prop_assert!(lhs <= bound * (1.0 + 1e-12) + 1e-300);
        }
    }
}
