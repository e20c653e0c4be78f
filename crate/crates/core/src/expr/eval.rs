use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, Expr, ExprError, Func};
use crate::math;

/// Values bound to the reserved identifiers plus named parameters.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub x: f64,
    pub t: f64,
    pub u: &'a [f64],
    pub v: f64,
    pub params: &'a BTreeMap<String, f64>,
}

/// Parses `u<k>` with `k >= 1` into the zero-based component index.
pub(crate) fn component_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('u')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}

fn apply_binary(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Pow => math::pow(a, b),
    }
}

fn apply_call(func: Func, args: &[f64]) -> Result<f64, ExprError> {
    let a = args[0];
    Ok(match func {
        Func::Sin => math::sin(a),
        Func::Cos => math::cos(a),
        Func::Exp => math::exp(a),
        Func::Log => {
            if a <= 0.0 {
                return Err(ExprError::Domain("log of a non-positive argument"));
            }
            math::log(a)
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(ExprError::Domain("sqrt of a negative argument"));
            }
            math::sqrt(a)
        }
        Func::Abs => a.abs(),
        Func::Tanh => math::tanh(a),
        Func::Min => a.min(args[1]),
        Func::Max => a.max(args[1]),
        Func::Sign => {
            if a > 0.0 {
                1.0
            } else if a < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    })
}

/// Evaluates a tree directly against a context.
pub fn evaluate(e: &Expr, ctx: &EvalContext<'_>) -> Result<f64, ExprError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Pi => Ok(math::PI),
        Expr::Ident(name) => match name.as_str() {
            "x" => Ok(ctx.x),
            "t" => Ok(ctx.t),
            "v" => Ok(ctx.v),
            _ => {
                if let Some(k) = component_index(name) {
                    if let Some(value) = ctx.u.get(k) {
                        return Ok(*value);
                    }
                }
                ctx.params
                    .get(name)
                    .copied()
                    .ok_or_else(|| ExprError::Unbound(name.clone()))
            }
        },
        Expr::Neg(inner) => Ok(-evaluate(inner, ctx)?),
        Expr::Binary(op, l, r) => Ok(apply_binary(*op, evaluate(l, ctx)?, evaluate(r, ctx)?)),
        Expr::Call(func, args) => {
            let mut vals = [0.0; 2];
            for (slot, a) in vals.iter_mut().zip(args) {
                *slot = evaluate(a, ctx)?;
            }
            apply_call(*func, &vals[..args.len()])
        }
    }
}

/// Which reserved identifiers a compiled expression may reference.
///
/// Slots are laid out as `[x, t, v, u1, ..., um]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotLayout {
    pub components: usize,
    /// `false` for initial data, which may depend on `x` and parameters only.
    pub state: bool,
}

impl SlotLayout {
    pub const X: usize = 0;
    pub const T: usize = 1;
    pub const V: usize = 2;

    pub fn state(components: usize) -> Self {
        SlotLayout { components, state: true }
    }

    pub fn initial_data(components: usize) -> Self {
        SlotLayout { components, state: false }
    }

    pub fn len(&self) -> usize {
        3 + self.components
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u(k: usize) -> usize {
        3 + k
    }

    fn resolve(&self, name: &str) -> Option<usize> {
        match name {
            "x" => Some(Self::X),
            "t" if self.state => Some(Self::T),
            "v" if self.state => Some(Self::V),
            _ if self.state => component_index(name)
                .filter(|k| *k < self.components)
                .map(Self::u),
            _ => None,
        }
    }

    /// True for identifiers that are variables under this layout.
    pub fn is_reserved(&self, name: &str) -> bool {
        self.resolve(name).is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        match self {
            Node::Const(v) => Ok(*v),
            Node::Slot(i) => Ok(slots[*i]),
            Node::Neg(inner) => Ok(-inner.eval(slots)?),
            Node::Binary(op, l, r) => Ok(apply_binary(*op, l.eval(slots)?, r.eval(slots)?)),
            Node::Call(func, args) => {
                let mut vals = [0.0; 2];
                for (slot, a) in vals.iter_mut().zip(args) {
                    *slot = a.eval(slots)?;
                }
                apply_call(*func, &vals[..args.len()])
            }
        }
    }
}

/// An expression with identifiers resolved to slots and parameters folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    root: Node,
    layout: SlotLayout,
}

impl CompiledExpr {
    pub fn compile(
        expr: &Expr,
        layout: SlotLayout,
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, ExprError> {
        Ok(CompiledExpr { root: lower(expr, &layout, params)?, layout })
    }

    pub fn layout(&self) -> SlotLayout {
        self.layout
    }

    /// Constant value if the expression folded completely.
    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        debug_assert!(slots.len() >= self.layout.len());
        self.root.eval(slots)
    }
}

fn lower(e: &Expr, layout: &SlotLayout, params: &BTreeMap<String, f64>) -> Result<Node, ExprError> {
    Ok(match e {
        Expr::Num(v) => Node::Const(*v),
        Expr::Pi => Node::Const(math::PI),
        Expr::Ident(name) => match layout.resolve(name) {
            Some(slot) => Node::Slot(slot),
            None => Node::Const(
                *params.get(name).ok_or_else(|| ExprError::Unbound(name.to_string()))?,
            ),
        },
        Expr::Neg(inner) => match lower(inner, layout, params)? {
            Node::Const(v) => Node::Const(-v),
            n => Node::Neg(Box::new(n)),
        },
        Expr::Binary(op, l, r) => {
            let l = lower(l, layout, params)?;
            let r = lower(r, layout, params)?;
            match (&l, &r) {
                (Node::Const(a), Node::Const(b)) => Node::Const(apply_binary(*op, *a, *b)),
                _ => Node::Binary(*op, Box::new(l), Box::new(r)),
            }
        }
        Expr::Call(func, args) => {
            let args = args
                .iter()
                .map(|a| lower(a, layout, params))
                .collect::<Result<Vec<_>, _>>()?;
            let consts: Vec<f64> = args
                .iter()
                .filter_map(|a| if let Node::Const(v) = a { Some(*v) } else { None })
                .collect();
            if consts.len() == args.len() {
                Node::Const(apply_call(*func, &consts)?)
            } else {
                Node::Call(*func, args)
            }
        }
    })
}
