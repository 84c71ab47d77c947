use super::{add, call, div, mul, neg, pow, sub, Expr, Func, Node, Var};

/// Symbolic partial derivative with respect to `var`.
///
/// `abs` differentiates to `sgn` and `sgn` to 0, which is exact away from
/// the origin.
pub fn differentiate(expr: &Expr, var: Var) -> Expr {
    Expr::new(d(expr.root(), var), expr.dim())
}

fn d(node: &Node, var: Var) -> Node {
    match node {
        Node::Num(_) | Node::Pi => Node::Num(0.0),
        Node::Var(v) => Node::Num(if *v == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(d(a, var)),
        Node::Add(a, b) => add(d(a, var), d(b, var)),
        Node::Sub(a, b) => sub(d(a, var), d(b, var)),
        Node::Mul(a, b) => add(
            mul(d(a, var), (**b).clone()),
            mul((**a).clone(), d(b, var)),
        ),
        Node::Div(a, b) => {
            let da = d(a, var);
            let db = d(b, var);
            if matches!(db, Node::Num(x) if x == 0.0) {
                return div(da, (**b).clone());
            }
            div(
                sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                pow((**b).clone(), 2),
            )
        }
        Node::Pow(a, n) => {
            let da = d(a, var);
            mul(
                mul(Node::Num(*n as f64), pow((**a).clone(), n - 1)),
                da,
            )
        }
        Node::Call(func, a) => {
            let da = d(a, var);
            if matches!(da, Node::Num(x) if x == 0.0) {
                return Node::Num(0.0);
            }
            let outer = match func {
                Func::Sin => call(Func::Cos, (**a).clone()),
                Func::Cos => neg(call(Func::Sin, (**a).clone())),
                Func::Exp => node.clone(),
                Func::Abs => call(Func::Sgn, (**a).clone()),
                Func::Sgn => Node::Num(0.0),
            };
            mul(outer, da)
        }
        Node::Bump { order, r, radius } => {
            let dr = d(r, var);
            let dradius = d(radius, var);
            let next = Node::Bump {
                order: order + 1,
                r: r.clone(),
                radius: radius.clone(),
            };
            let via_r = mul(next.clone(), dr);
            if matches!(dradius, Node::Num(x) if x == 0.0) {
                return via_r;
            }
            // d/dR of b_k(r; R) = -(k/R) b_k - (r/R) b_{k+1}
            let by_radius = neg(add(
                mul(
                    div(Node::Num(*order as f64), (**radius).clone()),
                    node.clone(),
                ),
                mul(div((**r).clone(), (**radius).clone()), next),
            ));
            add(via_r, mul(by_radius, dradius))
        }
    }
}
