use std::collections::BTreeMap;

use proptest::prelude::*;
use shadowlab_core::expr::{differentiate, evaluate, parse_expression, BinOp, EvalContext, Expr, Func};

// Smooth trees over u1, v, x and one parameter. Division and powers are
// kept away from singularities by construction.
fn smooth_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(|v| Expr::Num((v * 100.0).round() / 100.0)),
        Just(Expr::ident("u1")),
        Just(Expr::ident("v")),
        Just(Expr::ident("x")),
        Just(Expr::ident("k")),
        Just(Expr::Pi),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))),
            // a / (2 + tanh(b)) and exp(tanh(a))
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                let den = Expr::Binary(BinOp::Add, Box::new(Expr::Num(2.0)), Box::new(Expr::Call(Func::Tanh, vec![b])));
                Expr::Binary(BinOp::Div, Box::new(a), Box::new(den))
            }),
            inner.clone().prop_map(|a| Expr::Call(Func::Exp, vec![Expr::Call(Func::Tanh, vec![a])])),
            inner.clone().prop_map(|a| Expr::Call(Func::Sin, vec![a])),
            inner.clone().prop_map(|a| Expr::Call(Func::Cos, vec![a])),
            inner.clone().prop_map(|a| Expr::Binary(BinOp::Pow, Box::new(a), Box::new(Expr::Num(2.0)))),
            // sqrt(1 + a^2)
            inner.prop_map(|a| {
                let sq = Expr::Binary(BinOp::Pow, Box::new(a), Box::new(Expr::Num(2.0)));
                Expr::Call(Func::Sqrt, vec![Expr::Binary(BinOp::Add, Box::new(Expr::Num(1.0)), Box::new(sq))])
            }),
        ]
    })
}

fn eval_at(e: &Expr, u: f64, v: f64, x: f64, params: &BTreeMap<String, f64>) -> f64 {
    evaluate(e, &EvalContext { x, t: 0.0, u: &[u], v, params }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivatives_match_central_differences(
        e in smooth_tree(),
        u in -1.0f64..1.0,
        v in -1.0f64..1.0,
        x in 0.0f64..1.0,
    ) {
        let params: BTreeMap<String, f64> = [("k".to_string(), 0.7)].into_iter().collect();
        for (var, h) in [("u1", 1e-5), ("v", 1e-5)] {
            let de = differentiate(&e, var).unwrap();
            let shift = |s: f64| if var == "u1" { eval_at(&e, u + s, v, x, &params) } else { eval_at(&e, u, v + s, x, &params) };
            let (fp, fm) = (shift(h), shift(-h));
            let fd = (fp - fm) / (2.0 * h);
            let exact = eval_at(&de, u, v, x, &params);
            prop_assume!(fd.is_finite() && exact.is_finite() && fp.abs() < 1e6);
            // Central differences carry O(h^2 f''') truncation and O(eps f / h) rounding.
            let scale = 1.0 + exact.abs() + fp.abs().max(fm.abs());
            prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{var}: {fd} vs {exact} for {e}");
        }
    }

    #[test]
    fn printing_round_trips(e in smooth_tree(), u in -1.0f64..1.0, v in -1.0f64..1.0, x in 0.0f64..1.0) {
        let params: BTreeMap<String, f64> = [("k".to_string(), 0.7)].into_iter().collect();
        let text = e.to_string();
        let back = parse_expression(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        let (a, b) = (eval_at(&e, u, v, x, &params), eval_at(&back, u, v, x, &params));
        prop_assert!(a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{text}: {a} vs {b}");
    }
}

#[test]
fn differentiated_output_reparses() {
    let e = parse_expression("(d - a*u1 - c*v)*v + exp(-u1^2)/(1 + v^2)").unwrap();
    for var in ["u1", "v"] {
        let de = differentiate(&e, var).unwrap();
        let text = de.to_string();
        assert_eq!(parse_expression(&text).unwrap().to_string(), text);
    }
}
