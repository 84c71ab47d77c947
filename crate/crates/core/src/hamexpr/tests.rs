use proptest::prelude::*;

use super::*;

const DIM: usize = 2;

fn eval_at(e: &Expr, q: &[f64], p: &[f64], s: f64, sp: f64) -> Result<f64, ExprError> {
    evaluate(e, &Point::new(q, p, s, sp))
}

fn arb_var() -> impl Strategy<Value = Var> {
    prop_oneof![
        (0..DIM).prop_map(Var::Q),
        (0..DIM).prop_map(Var::P),
        Just(Var::S),
        Just(Var::Sp),
    ]
}

fn arb_func() -> impl Strategy<Value = Func> {
    prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Abs), Just(Func::Sgn)]
}

/// Trees in the shape the parser produces: literals are non-negative.
fn arb_tree() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0u32..1000, 0u32..3).prop_map(|(m, e)| Node::Num(m as f64 / 10f64.powi(e as i32))),
        Just(Node::Pi),
        arb_var().prop_map(Node::Var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Div(Box::new(a), Box::new(b))),
            (inner.clone(), -3i32..4).prop_map(|(a, n)| Node::Pow(Box::new(a), n)),
            (arb_func(), inner.clone()).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            (0u32..3, inner.clone(), inner).prop_map(|(order, r, radius)| Node::Bump {
                order,
                r: Box::new(r),
                radius: Box::new(radius),
            }),
        ]
    })
}

/// Smooth trees with no division or negative powers, bounded growth.
fn arb_smooth() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (1u32..30).prop_map(|m| Node::Num(m as f64 / 10.0)),
        arb_var().prop_map(Node::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| Node::Pow(Box::new(a), n)),
            inner.clone().prop_map(|a| Node::Call(Func::Sin, Box::new(a))),
            inner.clone().prop_map(|a| Node::Call(Func::Cos, Box::new(a))),
            // 1 + a^2 keeps the denominator away from zero
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Div(
                Box::new(a),
                Box::new(Node::Add(Box::new(Node::Num(1.0)), Box::new(Node::Pow(Box::new(b), 2))))
            )),
            (0u32..2, inner).prop_map(|(order, r)| Node::Bump {
                order,
                r: Box::new(r),
                radius: Box::new(Node::Num(2.0)),
            }),
        ]
    })
}

#[test]
fn parses_precedence() {
    let e = parse("-q1^2 + 2*p1/s - sp", 1).unwrap();
    let v = eval_at(&e, &[3.0], &[1.0], 4.0, 0.5).unwrap();
    assert_eq!(v, -9.0 + 0.5 - 0.5);
    let e = parse("2^3^2", 0).unwrap();
    assert_eq!(eval_at(&e, &[], &[], 0.0, 0.0).unwrap(), 64.0);
    let e = parse("q1^(-1) * s'", 1).unwrap();
    assert_eq!(eval_at(&e, &[4.0], &[0.0], 0.0, 2.0).unwrap(), 0.5);
    let e = parse("bump(q1^2 + p1^2, 4) * cos(pi*s)", 1).unwrap();
    assert_eq!(eval_at(&e, &[1.0], &[0.5], 0.0, 0.0).unwrap(), 1.0);
}

#[test]
fn reports_errors_with_positions() {
    assert_eq!(
        parse("q1 +", 1).unwrap_err(),
        ExprError::Syntax {
            pos: 5,
            msg: "unexpected end of input".into()
        }
    );
    assert!(matches!(parse("q1 + (p1", 1), Err(ExprError::Syntax { pos: 9, .. })));
    assert!(matches!(parse("q1 $ p1", 1), Err(ExprError::Syntax { pos: 4, .. })));
    assert!(matches!(parse("q1 p1", 1), Err(ExprError::Syntax { pos: 4, .. })));
    assert!(matches!(parse("q1^1.5", 1), Err(ExprError::Syntax { pos: 4, .. })));
    assert_eq!(
        parse("q1 + q3", 2).unwrap_err(),
        ExprError::UnknownIdentifier {
            name: "q3".into(),
            pos: 6
        }
    );
    for bad in ["q0", "q01", "x", "foo(q1)", "p"] {
        assert!(
            matches!(parse(bad, 2), Err(ExprError::UnknownIdentifier { .. })),
            "{bad}"
        );
    }
    assert_eq!(
        parse("sin(q1; p1)", 1).unwrap_err(),
        ExprError::Arity {
            name: "sin".into(),
            expected: 1,
            found: 2,
            pos: 1
        }
    );
    assert!(matches!(parse("bump(q1)", 1), Err(ExprError::Arity { expected: 2, found: 1, .. })));
}

#[test]
fn domain_errors_are_not_nan() {
    let e = parse("1/q1", 1).unwrap();
    assert!(matches!(eval_at(&e, &[0.0], &[0.0], 0.0, 0.0), Err(ExprError::Domain(_))));
    let e = parse("q1^-2", 1).unwrap();
    assert!(matches!(eval_at(&e, &[0.0], &[0.0], 0.0, 0.0), Err(ExprError::Domain(_))));
    let e = parse("bump(q1; s)", 1).unwrap();
    assert!(matches!(eval_at(&e, &[0.0], &[0.0], 0.0, 0.0), Err(ExprError::Domain(_))));
    let e = parse("exp(q1)", 1).unwrap();
    assert!(matches!(eval_at(&e, &[1000.0], &[0.0], 0.0, 0.0), Err(ExprError::Domain(_))));
}

#[test]
fn bump_plateau_and_support() {
    for i in 0..=100 {
        let r = i as f64 * 0.05;
        let v = bump_value(0, r, 4.0);
        assert!((0.0..=1.0).contains(&v));
        if r <= 2.0 {
            assert_eq!(v, 1.0, "r = {r}");
        }
        if r >= 4.0 {
            assert_eq!(v, 0.0, "r = {r}");
            assert_eq!(bump_value(1, r, 4.0), 0.0);
        }
    }
    // symmetric about the midpoint of the transition
    assert!((bump_value(0, 3.0, 4.0) - 0.5).abs() < 1e-15);
    // monotone decreasing
    for i in 0..100 {
        let r = 2.0 + i as f64 * 0.02;
        assert!(bump_value(0, r + 0.02, 4.0) <= bump_value(0, r, 4.0));
        assert!(bump_value(1, r, 4.0) <= 0.0);
    }
}

#[test]
fn bump_derivatives_match_finite_differences() {
    let h = 1e-5;
    for order in 0..5 {
        for i in 1..40 {
            let r = 1.9 + i as f64 * 0.055;
            let fd = (bump_value(order, r + h, 4.0) - bump_value(order, r - h, 4.0)) / (2.0 * h);
            let exact = bump_value(order + 1, r, 4.0);
            let scale = 1.0 + exact.abs();
            assert!((fd - exact).abs() < 1e-4 * scale, "order {order} r {r}: {fd} vs {exact}");
        }
    }
}

#[test]
fn derivative_in_radius() {
    let e = parse("bump_d1(q1; p1)", 1).unwrap();
    let de = differentiate(&e, Var::P(0));
    let h = 1e-6;
    for (q, p) in [(2.5, 4.0), (3.1, 4.2), (1.0, 1.5)] {
        let fd = (eval_at(&e, &[q], &[p + h], 0.0, 0.0).unwrap()
            - eval_at(&e, &[q], &[p - h], 0.0, 0.0).unwrap())
            / (2.0 * h);
        let exact = eval_at(&de, &[q], &[p], 0.0, 0.0).unwrap();
        assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }
}

#[test]
fn simple_derivatives() {
    let e = parse("q1^2*p1 + sin(s)", 1).unwrap();
    assert_eq!(differentiate(&e, Var::Q(0)).to_string(), "2*q1*p1");
    assert_eq!(differentiate(&e, Var::P(0)).to_string(), "q1^2");
    assert_eq!(differentiate(&e, Var::S).to_string(), "cos(s)");
    assert!(differentiate(&e, Var::Sp).is_zero());
}

#[test]
fn textbook_derivatives() {
    let e = parse("p1^2/2 + cos(q1)", 1).unwrap();
    assert_eq!(eval_at(&e, &[0.0], &[0.0], 0.0, 0.0).unwrap(), 1.0);
    assert_eq!(differentiate(&e, Var::Q(0)).to_string(), "-sin(q1)");
    assert_eq!(differentiate(&e, Var::P(0)).to_string(), "p1");
    let e = parse("s*(q1^2+p1^2)*bump(q1^2+p1^2; 4)", 1).unwrap();
    assert!(e.depends_on(Var::S));
}

/// Fourth-order central difference.
fn five_point(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn catalog_derivatives_match_finite_differences() {
    let catalog = [
        "p1^2/2 + cos(q1)",
        "(q1^2 + p1^2)/2",
        "q1^3*p2 - q2*p1^2",
        "sin(q1*p1)*exp(-q2^2)",
        "s*(q1^2+p1^2)*bump(q1^2+p1^2; 4)",
        "q1/(1 + p1^2 + q2^2)",
        "cos(2*pi*s)*q2*p2",
        "bump_d1(q1^2 + p2^2; 3) + sp*q1",
        "exp(sin(q1) + cos(p2))/(2 + s^2)",
        "(q1 - p1)^4 - 3*q2^(-2)",
    ];
    let mut state = 0x2545f4914f6cdd1du64;
    let mut uniform = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for text in catalog {
        let e = parse(text, 2).unwrap();
        for var in [Var::Q(0), Var::Q(1), Var::P(0), Var::P(1), Var::S, Var::Sp] {
            let de = differentiate(&e, var);
            for _ in 0..100 {
                let mut x = [0.0; 6];
                for c in x.iter_mut() {
                    *c = 0.5 + 1.5 * uniform();
                }
                let slot = match var {
                    Var::Q(i) => i,
                    Var::P(i) => 2 + i,
                    Var::S => 4,
                    Var::Sp => 5,
                };
                let f = |t: f64| {
                    let mut v = x;
                    v[slot] = t;
                    eval_at(&e, &v[0..2], &v[2..4], v[4], v[5]).unwrap()
                };
                let fd = five_point(f, x[slot], 2e-4);
                let exact = eval_at(&de, &x[0..2], &x[2..4], x[4], x[5]).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-8 * (1.0 + exact.abs()),
                    "{text} d/d{var} at {x:?}: {fd} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn bump_is_c1_at_sampled_resolution() {
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 0..=6000 {
        let r = i as f64 * 1e-3;
        let second = (bump_value(0, r + h, 4.0) - 2.0 * bump_value(0, r, 4.0)
            + bump_value(0, r - h, 4.0))
            / (h * h);
        worst = worst.max(second.abs());
        assert!((second - bump_value(2, r, 4.0)).abs() < 1e-3 * (1.0 + second.abs()));
    }
    assert!(worst < 10.0, "{worst}");
}

#[test]
fn dependency_queries() {
    let e = parse("s*sp + 1", 2).unwrap();
    assert!(!e.depends_on_phase());
    assert!(e.depends_on(Var::Sp));
    assert!(!e.depends_on(Var::Q(1)));
    let k = e.substitute(Var::S, &parse("q2", 2).unwrap());
    assert!(k.depends_on_phase());
    assert_eq!(k.to_string(), "q2*sp + 1");
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn print_parse_round_trip(tree in arb_tree()) {
        let e = Expr::new(tree, DIM);
        let printed = e.to_string();
        let back = parse(&printed, DIM).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
    }

    #[test]
    fn derivative_matches_central_difference(
        tree in arb_smooth(),
        var in arb_var(),
        x in prop::array::uniform6(-1.5f64..1.5),
    ) {
        let e = Expr::new(tree, DIM);
        let de = differentiate(&e, var);
        let at = |shift: f64| {
            let mut v = x;
            let slot = match var {
                Var::Q(i) => i,
                Var::P(i) => DIM + i,
                Var::S => 4,
                Var::Sp => 5,
            };
            v[slot] += shift;
            eval_at(&e, &v[0..2], &v[2..4], v[4], v[5])
        };
        let h = 1e-3;
        let (Ok(plus), Ok(minus), Ok(exact)) =
            (at(h), at(-h), eval_at(&de, &x[0..2], &x[2..4], x[4], x[5]))
        else {
            return Ok(());
        };
        let fd = (plus - minus) / (2.0 * h);
        let (Ok(plus2), Ok(minus2)) = (at(2.0 * h), at(-2.0 * h)) else { return Ok(()); };
        let fd2 = (plus2 - minus2) / (4.0 * h);
        let rich = (4.0 * fd - fd2) / 3.0;
        prop_assume!(plus.abs() < 1e6 && exact.abs() < 1e6);
        prop_assert!(close(rich, exact, 1e-7),
            "{} d/d{}: fd {} vs {}", e, var, rich, exact);
    }
}
