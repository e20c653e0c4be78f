use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::StabilityError;
use crate::basis::SpectralGrid;
use crate::fullsolve::SolverError;
use crate::model::{CompiledModel, JacobianBlocks, ModelSpec};
use crate::shadow::ShadowTrajectory;

/// Entries beyond this magnitude count as unbounded.
pub const MAX_ENTRY: f64 = 1e12;

/// Jacobian blocks `A = grad_u f`, `B = df/dv`, `C = grad_u g`, `D = dg/dv`
/// sampled on grid nodes and a list of times.
#[derive(Debug, Clone)]
pub struct JacobianField {
    grid: Arc<SpectralGrid>,
    m: usize,
    times: Vec<f64>,
    // index (ti * n + k) * m * m + i * m + j
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl JacobianField {
    /// Builds a field from a per-(time, node) fill. `fill` receives
    /// `(time index, node index, x, t)` and zeroed blocks.
    pub fn from_fn(
        grid: &Arc<SpectralGrid>,
        m: usize,
        times: Vec<f64>,
        mut fill: impl FnMut(usize, usize, f64, f64, &mut JacobianBlocks) -> Result<(), StabilityError>,
    ) -> Result<Self, StabilityError> {
        if m == 0 {
            return Err(StabilityError::Shape("at least one u-component is required"));
        }
        if times.is_empty() {
            return Err(StabilityError::Shape("at least one time sample is required"));
        }
        let n = grid.len();
        let cells = times.len() * n;
        let mut field = JacobianField {
            grid: grid.clone(),
            m,
            a: Vec::with_capacity(cells * m * m),
            b: Vec::with_capacity(cells * m),
            c: Vec::with_capacity(cells * m),
            d: Vec::with_capacity(cells),
            times,
        };
        let mut blocks = JacobianBlocks::zeros(m);
        for ti in 0..field.times.len() {
            let t = field.times[ti];
            for (k, &x) in grid.nodes().iter().enumerate() {
                blocks.a.fill(0.0);
                blocks.b.fill(0.0);
                blocks.c.fill(0.0);
                blocks.d = 0.0;
                fill(ti, k, x, t, &mut blocks)?;
                let entries = blocks.a.iter().chain(&blocks.b).chain(&blocks.c).chain([&blocks.d]);
                for &value in entries {
                    if !(value.abs() <= MAX_ENTRY) {
                        return Err(StabilityError::Unbounded { t, x, value });
                    }
                }
                field.a.extend_from_slice(&blocks.a);
                field.b.extend_from_slice(&blocks.b);
                field.c.extend_from_slice(&blocks.c);
                field.d.push(blocks.d);
            }
        }
        Ok(field)
    }

    /// Time-independent field.
    pub fn stationary(
        grid: &Arc<SpectralGrid>,
        m: usize,
        mut fill: impl FnMut(usize, f64, &mut JacobianBlocks),
    ) -> Result<Self, StabilityError> {
        Self::from_fn(grid, m, vec![0.0], |_, k, x, _, blocks| {
            fill(k, x, blocks);
            Ok(())
        })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_stationary(&self) -> bool {
        self.times.len() == 1
    }

    fn cell(&self, ti: usize, k: usize) -> usize {
        ti * self.n() + k
    }

    /// Row-major `m x m` block `A` at time index `ti`, node `k`.
    pub fn a(&self, ti: usize, k: usize) -> &[f64] {
        let mm = self.m * self.m;
        let at = self.cell(ti, k) * mm;
        &self.a[at..at + mm]
    }

    pub fn b(&self, ti: usize, k: usize) -> &[f64] {
        let at = self.cell(ti, k) * self.m;
        &self.b[at..at + self.m]
    }

    pub fn c(&self, ti: usize, k: usize) -> &[f64] {
        let at = self.cell(ti, k) * self.m;
        &self.c[at..at + self.m]
    }

    pub fn d(&self, ti: usize, k: usize) -> f64 {
        self.d[self.cell(ti, k)]
    }

    pub fn blocks(&self, ti: usize, k: usize) -> JacobianBlocks {
        JacobianBlocks { a: self.a(ti, k).to_vec(), b: self.b(ti, k).to_vec(), c: self.c(ti, k).to_vec(), d: self.d(ti, k) }
    }

    /// Largest entry magnitude over all blocks, nodes and times.
    pub fn sup_bound(&self) -> f64 {
        self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d).fold(0.0, |m: f64, z| m.max(z.abs()))
    }

    /// Node average of `D` at time index `ti`.
    pub fn mean_d(&self, ti: usize) -> f64 {
        (0..self.n()).map(|k| self.d(ti, k)).sum::<f64>() / self.n() as f64
    }

    /// The single-time field at time index `ti`.
    pub fn snapshot(&self, ti: usize) -> JacobianField {
        let n = self.n();
        let (m, mm) = (self.m, self.m * self.m);
        let (lo, hi) = (ti * n, (ti + 1) * n);
        JacobianField {
            grid: self.grid.clone(),
            m,
            times: vec![self.times[ti]],
            a: self.a[lo * mm..hi * mm].to_vec(),
            b: self.b[lo * m..hi * m].to_vec(),
            c: self.c[lo * m..hi * m].to_vec(),
            d: self.d[lo..hi].to_vec(),
        }
    }

    pub(crate) fn require_stationary(&self) -> Result<(), StabilityError> {
        if self.is_stationary() {
            Ok(())
        } else {
            Err(StabilityError::NotStationary(self.times.len()))
        }
    }

    /// Linear interpolation weights `(i0, i1, w)` for time `t`, held
    /// constant outside the sampled range.
    pub(crate) fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let last = self.times.len() - 1;
        if last == 0 || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        if t >= self.times[last] {
            return (last, last, 0.0);
        }
        let i1 = self.times.partition_point(|&s| s <= t);
        let i0 = i1 - 1;
        let w = (t - self.times[i0]) / (self.times[i1] - self.times[i0]);
        (i0, i1, w)
    }

    /// Writes the blocks at time `t` for every node into flat buffers laid
    /// out like a single time slice.
    pub(crate) fn interpolate_into(&self, t: f64, out: &mut CoefficientSlice) {
        let (i0, i1, w) = self.bracket(t);
        let n = self.n();
        let (m, mm) = (self.m, self.m * self.m);
        let mix = |src: &[f64], width: usize, dst: &mut Vec<f64>| {
            dst.clear();
            let s0 = &src[i0 * n * width..(i0 + 1) * n * width];
            if w == 0.0 {
                dst.extend_from_slice(s0);
            } else {
                let s1 = &src[i1 * n * width..(i1 + 1) * n * width];
                dst.extend(s0.iter().zip(s1).map(|(p, q)| p + w * (q - p)));
            }
        };
        mix(&self.a, mm, &mut out.a);
        mix(&self.b, m, &mut out.b);
        mix(&self.c, m, &mut out.c);
        mix(&self.d, 1, &mut out.d);
        out.m = m;
    }
}

/// Blocks for every node at one instant.
#[derive(Debug, Clone, Default)]
pub(crate) struct CoefficientSlice {
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

fn eval_error(e: crate::expr::ExprError) -> StabilityError {
    StabilityError::Solver(SolverError::Eval(e))
}

/// Evaluates the symbolic Jacobian at the shadow solution on every node
/// and stored time.
pub fn jacobian_at(model: &ModelSpec, shadow: &ShadowTrajectory) -> Result<JacobianField, StabilityError> {
    let compiled = model.compile().map_err(SolverError::from)?;
    let m = compiled.m();
    if shadow.states[0].u.len() != m {
        return Err(StabilityError::Shape("shadow trajectory and model have different component counts"));
    }
    let mut slots = compiled.slot_buffer();
    let nodal: Vec<Vec<Vec<f64>>> =
        shadow.states.iter().map(|s| s.u.iter().map(|ui| ui.nodal().into_owned()).collect()).collect();
    JacobianField::from_fn(shadow.grid(), m, shadow.times.clone(), |ti, k, x, t, blocks| {
        let v = shadow.states[ti].v;
        CompiledModel::fill_slots(&mut slots, x, t, v, nodal[ti].iter().map(|ui| ui[k]));
        compiled.jacobian(&slots, blocks).map_err(eval_error)
    })
}

/// Jacobian at a fixed state, e.g. a steady state of the shadow system.
pub fn jacobian_at_state(
    model: &ModelSpec,
    grid: &Arc<SpectralGrid>,
    u: &[Vec<f64>],
    v: f64,
    t: f64,
) -> Result<JacobianField, StabilityError> {
    let compiled = model.compile().map_err(SolverError::from)?;
    let m = compiled.m();
    if u.len() != m || u.iter().any(|ui| ui.len() != grid.len()) {
        return Err(StabilityError::Shape("state does not match the model and grid"));
    }
    let mut slots = compiled.slot_buffer();
    JacobianField::from_fn(grid, m, vec![t], |_, k, x, t, blocks| {
        CompiledModel::fill_slots(&mut slots, x, t, v, u.iter().map(|ui| ui[k]));
        compiled.jacobian(&slots, blocks).map_err(eval_error)
    })
}
