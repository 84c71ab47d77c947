use std::fmt::{self, Write};

use super::Node;

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Neg(_) => NEG,
        Node::Pow(..) => POW,
        _ => ATOM,
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() {
        write!(f, "(-{})", -x)
    } else {
        write!(f, "{x}")
    }
}

fn operand(f: &mut fmt::Formatter<'_>, node: &Node, level: u8, right: bool) -> fmt::Result {
    let p = prec(node);
    if p < level || (right && (p == level || p == NEG)) {
        write!(f, "({node})")
    } else {
        write!(f, "{node}")
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node, level: u8) -> fmt::Result {
    operand(f, a, level, false)?;
    f.write_str(op)?;
    operand(f, b, level, true)
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(x) => write_num(f, *x),
            Node::Pi => f.write_str("pi"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => {
                f.write_char('-')?;
                operand(f, a, NEG, false)
            }
            Node::Add(a, b) => binary(f, a, " + ", b, ADD),
            Node::Sub(a, b) => binary(f, a, " - ", b, ADD),
            Node::Mul(a, b) => binary(f, a, "*", b, MUL),
            Node::Div(a, b) => binary(f, a, "/", b, MUL),
            Node::Pow(a, n) => {
                if prec(a) >= POW {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "({a})")?;
                }
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Bump { order, r, radius } => {
                if *order == 0 {
                    write!(f, "bump({r}; {radius})")
                } else {
                    write!(f, "bump_d{order}({r}; {radius})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::hamexpr::parse;

    #[test]
    fn prints_minimal_parentheses() {
        for (input, printed) in [
            ("q1 + p1*2", "q1 + p1*2"),
            ("(q1 + p1)*2", "(q1 + p1)*2"),
            ("q1 - (p1 - s)", "q1 - (p1 - s)"),
            ("-q1^2", "-q1^2"),
            ("(-q1)^2", "(-q1)^2"),
            ("q1^-2", "q1^(-2)"),
            ("q1 * -p1", "q1*(-p1)"),
            ("bump(q1^2+p1^2, 4)", "bump(q1^2 + p1^2; 4)"),
            ("0.5*sin(2*pi*s)", "0.5*sin(2*pi*s)"),
        ] {
            assert_eq!(parse(input, 1).unwrap().to_string(), printed, "{input}");
        }
    }
}
