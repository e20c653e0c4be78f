use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;

use super::eval::component_index;
use super::{BinOp, Expr, ExprError, Func};

// Smart constructors: constant folding plus 0/1 absorption, nothing more.

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => num(-v),
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x + y),
        (Some(z), _) if z == 0.0 => b,
        (_, Some(z)) if z == 0.0 => a,
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x - y),
        (Some(z), _) if z == 0.0 => neg(b),
        (_, Some(z)) if z == 0.0 => a,
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x * y),
        (Some(z), _) | (_, Some(z)) if z == 0.0 => num(0.0),
        (Some(o), _) if o == 1.0 => b,
        (_, Some(o)) if o == 1.0 => a,
        _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) if y != 0.0 => num(x / y),
        (Some(z), _) if z == 0.0 => num(0.0),
        (_, Some(o)) if o == 1.0 => a,
        _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match b.as_num() {
        Some(z) if z == 0.0 => num(1.0),
        Some(o) if o == 1.0 => a,
        _ => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn call(func: Func, arg: Expr) -> Expr {
    Expr::Call(func, vec![arg])
}

/// Exact symbolic partial derivative with respect to `v` or a component `u<k>`.
///
/// `abs`, `min` and `max` use `d|z|/dz = sign(z)` with `sign(0) = 0`; at ties
/// `min`/`max` take the average of both branch derivatives.
pub fn differentiate(e: &Expr, var: &str) -> Result<Expr, ExprError> {
    if var != "v" && component_index(var).is_none() {
        return Err(ExprError::NotDifferentiable(var.to_string()));
    }
    Ok(d(e, var))
}

fn d(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Num(_) | Expr::Pi => num(0.0),
        Expr::Ident(name) => num(if name == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(d(a, var)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => add(d(a, var), d(b, var)),
                BinOp::Sub => sub(d(a, var), d(b, var)),
                BinOp::Mul => add(mul(d(a, var), b.clone()), mul(a.clone(), d(b, var))),
                BinOp::Div => {
                    let da = d(a, var);
                    let db = d(b, var);
                    if db.is_zero() {
                        div(da, b.clone())
                    } else {
                        div(
                            sub(mul(da, b.clone()), mul(a.clone(), db)),
                            pow(b.clone(), num(2.0)),
                        )
                    }
                }
                BinOp::Pow => {
                    let da = d(a, var);
                    if !b.depends_on(var) {
                        // b * a^(b-1) * a'
                        let lowered = match b.as_num() {
                            Some(k) => num(k - 1.0),
                            None => sub(b.clone(), num(1.0)),
                        };
                        mul(mul(b.clone(), pow(a.clone(), lowered)), da)
                    } else {
                        // a^b * (b' log a + b a' / a)
                        let db = d(b, var);
                        mul(
                            e.clone(),
                            add(
                                mul(db, call(Func::Log, a.clone())),
                                div(mul(b.clone(), da), a.clone()),
                            ),
                        )
                    }
                }
            }
        }
        Expr::Call(func, args) => {
            let a = &args[0];
            let da = d(a, var);
            match func {
                Func::Sin => mul(call(Func::Cos, a.clone()), da),
                Func::Cos => mul(neg(call(Func::Sin, a.clone())), da),
                Func::Exp => mul(e.clone(), da),
                Func::Log => div(da, a.clone()),
                Func::Sqrt => div(da, mul(num(2.0), e.clone())),
                Func::Abs => mul(call(Func::Sign, a.clone()), da),
                Func::Tanh => mul(sub(num(1.0), pow(e.clone(), num(2.0))), da),
                Func::Sign => num(0.0),
                Func::Min | Func::Max => {
                    let b = &args[1];
                    let db = d(b, var);
                    if da.is_zero() && db.is_zero() {
                        return num(0.0);
                    }
                    let s = mul(call(Func::Sign, sub(a.clone(), b.clone())), sub(da.clone(), db.clone()));
                    let sum = add(da, db);
                    let combined = if *func == Func::Min { sub(sum, s) } else { add(sum, s) };
                    div(combined, num(2.0))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, parse_expression, EvalContext};
    use alloc::collections::BTreeMap;
    use alloc::format;
    use alloc::string::String;
    use rand::{Rng, SeedableRng};

    fn diff_str(s: &str, var: &str) -> Expr {
        differentiate(&parse_expression(s).unwrap(), var).unwrap()
    }

    #[test]
    fn product_rule_absorbs_units() {
        assert_eq!(format!("{}", diff_str("u1*v", "u1")), "v");
        assert_eq!(diff_str("u1", "v"), Expr::Num(0.0));
    }

    #[test]
    fn rejects_non_state_variables() {
        let e = parse_expression("x*v").unwrap();
        assert!(matches!(differentiate(&e, "x"), Err(ExprError::NotDifferentiable(_))));
        assert!(matches!(differentiate(&e, "t"), Err(ExprError::NotDifferentiable(_))));
        assert!(matches!(differentiate(&e, "a"), Err(ExprError::NotDifferentiable(_))));
    }

    #[test]
    fn predator_prey_dv_matches_finite_differences() {
        // d/dv (d - a u1 - c v) v = d - a u1 - 2 c v, checked by central differences.
        let e = parse_expression("(d - a*u1 - c*v)*v").unwrap();
        let de = differentiate(&e, "v").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let params: BTreeMap<String, f64> = ["a", "c", "d"]
                .iter()
                .map(|k| (String::from(*k), rng.random_range(0.1..2.0)))
                .collect();
            let u = [rng.random_range(-1.0..1.0)];
            let v = rng.random_range(-1.0..1.0);
            let at = |v: f64| {
                evaluate(&e, &EvalContext { x: 0.3, t: 0.0, u: &u, v, params: &params }).unwrap()
            };
            let h = 1e-6;
            let fd = (at(v + h) - at(v - h)) / (2.0 * h);
            let exact = evaluate(&de, &EvalContext { x: 0.3, t: 0.0, u: &u, v, params: &params })
                .unwrap();
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
            let closed = params["d"] - params["a"] * u[0] - 2.0 * params["c"] * v;
            assert!((closed - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn kink_conventions() {
        let none = BTreeMap::new();
        let at = |s: &str, v: f64| {
            let de = diff_str(s, "v");
            evaluate(&de, &EvalContext { x: 0.0, t: 0.0, u: &[0.0], v, params: &none }).unwrap()
        };
        assert_eq!(at("abs(v)", 0.0), 0.0);
        assert_eq!(at("abs(v)", -2.0), -1.0);
        assert_eq!(at("min(v, 1)", 0.0), 1.0);
        assert_eq!(at("min(v, 1)", 2.0), 0.0);
        assert_eq!(at("max(v, 1)", 1.0), 0.5);
        assert_eq!(at("max(v, u1)", 3.0), 1.0);
    }
}
