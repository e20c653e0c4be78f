//! Symbolic model definitions and their compiled, differentiated form.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::SpectralGrid;
use crate::expr::{differentiate, parse_expression, CompiledExpr, Expr, ExprError, SlotLayout};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{what}: {source}")]
    Expr { what: String, source: ExprError },
    #[error("model needs at least one u-component")]
    NoComponents,
    #[error("{what} has {got} entries, expected {expected}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("diffusion D{index} = {value} must be finite and non-negative")]
    Diffusion { index: usize, value: f64 },
    #[error("parameter `{0}` collides with a reserved identifier")]
    ReservedParameter(String),
    #[error("parameter `{name}` = {value} is not finite")]
    NonFiniteParameter { name: String, value: f64 },
    #[error("unknown built-in model `{0}`")]
    UnknownBuiltin(String),
}

fn expr_error(what: String) -> impl FnOnce(ExprError) -> ModelError {
    move |source| ModelError::Expr { what, source }
}

/// `m` reaction-diffusion-ODE components `u_i` coupled to one fast-diffusing
/// species `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub diffusion: Vec<f64>,
    pub f: Vec<Expr>,
    pub g: Expr,
    pub u0: Vec<Expr>,
    pub v0: Expr,
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    /// Builds a spec from expression source text.
    pub fn parse(
        diffusion: &[f64],
        f: &[&str],
        g: &str,
        u0: &[&str],
        v0: &str,
        params: BTreeMap<String, f64>,
    ) -> Result<Self, ModelError> {
        let parse_list = |name: &str, list: &[&str]| {
            list.iter()
                .enumerate()
                .map(|(i, s)| parse_expression(s).map_err(expr_error(format!("{name}[{i}]"))))
                .collect::<Result<Vec<_>, _>>()
        };
        let spec = ModelSpec {
            diffusion: diffusion.to_vec(),
            f: parse_list("f", f)?,
            g: parse_expression(g).map_err(expr_error("g".into()))?,
            u0: parse_list("u0", u0)?,
            v0: parse_expression(v0).map_err(expr_error("v0".into()))?,
            params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn m(&self) -> usize {
        self.f.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.compile().map(|_| ())
    }

    pub fn compile(&self) -> Result<CompiledModel, ModelError> {
        let m = self.m();
        if m == 0 {
            return Err(ModelError::NoComponents);
        }
        for (what, got) in [("diffusion", self.diffusion.len()), ("u0", self.u0.len())] {
            if got != m {
                return Err(ModelError::Shape { what, expected: m, got });
            }
        }
        for (index, &value) in self.diffusion.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::Diffusion { index: index + 1, value });
            }
        }
        let state = SlotLayout::state(m);
        for (name, &value) in &self.params {
            if state.is_reserved(name) || name == "pi" {
                return Err(ModelError::ReservedParameter(name.clone()));
            }
            if !value.is_finite() {
                return Err(ModelError::NonFiniteParameter { name: name.clone(), value });
            }
        }
        let p = &self.params;
        let compile = |e: &Expr, layout, what: String| {
            CompiledExpr::compile(e, layout, p).map_err(expr_error(what))
        };
        let derive = |e: &Expr, var: &str, what: &str| -> Result<CompiledExpr, ModelError> {
            let label = format!("d{what}/d{var}");
            let de = differentiate(e, var).map_err(expr_error(label.clone()))?;
            compile(&de, state, label)
        };
        let vars: Vec<String> = (1..=m).map(|k| format!("u{k}")).collect();

        let mut f = Vec::with_capacity(m);
        let mut df_du = Vec::with_capacity(m * m);
        let mut df_dv = Vec::with_capacity(m);
        for (i, fi) in self.f.iter().enumerate() {
            let name = format!("f{}", i + 1);
            f.push(compile(fi, state, name.clone())?);
            for var in &vars {
                df_du.push(derive(fi, var, &name)?);
            }
            df_dv.push(derive(fi, "v", &name)?);
        }
        let g = compile(&self.g, state, "g".into())?;
        let dg_du = vars.iter().map(|var| derive(&self.g, var, "g")).collect::<Result<Vec<_>, _>>()?;
        let dg_dv = derive(&self.g, "v", "g")?;

        let init = SlotLayout::initial_data(m);
        let u0 = self
            .u0
            .iter()
            .enumerate()
            .map(|(i, e)| compile(e, init, format!("u0[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let v0 = compile(&self.v0, init, "v0".into())?;

        Ok(CompiledModel {
            m,
            diffusion: self.diffusion.clone(),
            f,
            g,
            df_du,
            df_dv,
            dg_du,
            dg_dv,
            u0,
            v0,
        })
    }
}

/// Nodal initial data sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

/// Jacobian blocks at one point: `a = grad_u f` (row-major `m x m`),
/// `b = d f / dv`, `c = grad_u g`, `d = dg/dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

impl JacobianBlocks {
    pub fn zeros(m: usize) -> Self {
        JacobianBlocks { a: vec![0.0; m * m], b: vec![0.0; m], c: vec![0.0; m], d: 0.0 }
    }
}

/// A model with all expressions bound to slots and all first partials
/// derived symbolically.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    m: usize,
    diffusion: Vec<f64>,
    f: Vec<CompiledExpr>,
    g: CompiledExpr,
    df_du: Vec<CompiledExpr>,
    df_dv: Vec<CompiledExpr>,
    dg_du: Vec<CompiledExpr>,
    dg_dv: CompiledExpr,
    u0: Vec<CompiledExpr>,
    v0: CompiledExpr,
}

impl CompiledModel {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    /// Scratch slot buffer of the right length.
    pub fn slot_buffer(&self) -> Vec<f64> {
        vec![0.0; SlotLayout::state(self.m).len()]
    }

    #[inline]
    pub fn fill_slots(slots: &mut [f64], x: f64, t: f64, v: f64, u: impl IntoIterator<Item = f64>) {
        slots[SlotLayout::X] = x;
        slots[SlotLayout::T] = t;
        slots[SlotLayout::V] = v;
        for (s, ui) in slots[3..].iter_mut().zip(u) {
            *s = ui;
        }
    }

    pub fn initial_data(&self, grid: &SpectralGrid) -> Result<InitialData, ModelError> {
        let mut slots = vec![0.0; SlotLayout::initial_data(self.m).len()];
        let mut sample = |e: &CompiledExpr, what: String| {
            grid.nodes()
                .iter()
                .map(|&x| {
                    slots[SlotLayout::X] = x;
                    e.eval(&slots)
                })
                .collect::<Result<Vec<f64>, _>>()
                .map_err(expr_error(what))
        };
        let u = self
            .u0
            .iter()
            .enumerate()
            .map(|(i, e)| sample(e, format!("u0[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let v = sample(&self.v0, "v0".into())?;
        Ok(InitialData { u, v })
    }

    /// Writes `f(slots)` into `f_out` and returns `g(slots)`.
    #[inline]
    pub fn reaction(&self, slots: &[f64], f_out: &mut [f64]) -> Result<f64, ExprError> {
        for (out, fi) in f_out.iter_mut().zip(&self.f) {
            *out = fi.eval(slots)?;
        }
        self.g.eval(slots)
    }

    #[inline]
    pub fn jacobian(&self, slots: &[f64], out: &mut JacobianBlocks) -> Result<(), ExprError> {
        for (a, e) in out.a.iter_mut().zip(&self.df_du) {
            *a = e.eval(slots)?;
        }
        for (b, e) in out.b.iter_mut().zip(&self.df_dv) {
            *b = e.eval(slots)?;
        }
        for (c, e) in out.c.iter_mut().zip(&self.dg_du) {
            *c = e.eval(slots)?;
        }
        out.d = self.dg_dv.eval(slots)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::builtin_model;

    #[test]
    fn predator_prey_jacobian_closed_form() {
        let spec = builtin_model("predator-prey", &BTreeMap::new()).unwrap();
        let model = spec.compile().unwrap();
        let mut slots = model.slot_buffer();
        let mut j = JacobianBlocks::zeros(1);
        CompiledModel::fill_slots(&mut slots, 0.2, 1.0, 0.7, [0.4]);
        model.jacobian(&slots, &mut j).unwrap();
        // [[-p, b], [-a v, d - 2 c v - a u]] at unit parameters
        assert_eq!(j.a, [-1.0]);
        assert_eq!(j.b, [1.0]);
        assert_eq!(j.c, [-0.7]);
        assert!((j.d - (1.0 - 1.4 - 0.4)).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let none = BTreeMap::new();
        assert!(matches!(
            ModelSpec::parse(&[], &[], "v", &[], "1", none.clone()),
            Err(ModelError::NoComponents)
        ));
        assert!(matches!(
            ModelSpec::parse(&[1.0, 2.0], &["0"], "v", &["0"], "1", none.clone()),
            Err(ModelError::Shape { what: "diffusion", .. })
        ));
        assert!(matches!(
            ModelSpec::parse(&[-1.0], &["0"], "v", &["0"], "1", none.clone()),
            Err(ModelError::Diffusion { index: 1, .. })
        ));
        assert!(matches!(
            ModelSpec::parse(&[0.0], &["k*u1"], "v", &["0"], "1", none.clone()),
            Err(ModelError::Expr { .. })
        ));
        // initial data may not depend on the state
        assert!(matches!(
            ModelSpec::parse(&[0.0], &["0"], "v", &["v"], "1", none.clone()),
            Err(ModelError::Expr { .. })
        ));
        let clash: BTreeMap<String, f64> = [(String::from("v"), 1.0)].into_iter().collect();
        assert!(matches!(
            ModelSpec::parse(&[0.0], &["0"], "v", &["0"], "1", clash),
            Err(ModelError::ReservedParameter(_))
        ));
    }

    #[test]
    fn initial_data_sampling() {
        let grid = SpectralGrid::new(8).unwrap();
        let spec = ModelSpec::parse(&[0.0], &["0"], "0", &["x"], "2*x + 1", BTreeMap::new()).unwrap();
        let data = spec.compile().unwrap().initial_data(&grid).unwrap();
        assert_eq!(data.u[0], grid.nodes());
        assert_eq!(data.v[0], 2.0 / 16.0 + 1.0);
    }
}
