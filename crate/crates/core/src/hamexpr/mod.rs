//! Hamiltonian expressions: parsing, printing, differentiation, evaluation.
//!
//! The grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' ['-'] INT | '^' '(' ['-'] INT ')')*
//! primary := NUMBER | 'pi' | VAR | FUNC '(' args ')' | '(' expr ')'
//! ```
//!
//! Variables are `q1..qn`, `p1..pn`, `s` and `sp` (the second time
//! parameter `s'`). Functions are `sin`, `cos`, `exp`, `abs`, `sgn`, the
//! cutoff `bump(r; R)` and its `r`-derivatives `bump_d1`, `bump_d2`, ...
//! Arguments may be separated by `;` or `,`.
//!
//! `bump(r; R)` is the plateau function `1 - S(2r/R - 1)` where
//! `S(t) = ψ(t) / (ψ(t) + ψ(1 - t))` and `ψ(x) = exp(-1/x)` for `x > 0`,
//! `ψ(x) = 0` otherwise. It equals 1 for `r <= R/2`, 0 for `r >= R`, and is
//! smooth in both arguments. It is meant to be applied to squared radii,
//! e.g. `bump(q1^2 + p1^2; 4)`.

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;

use thiserror::Error;

pub use diff::differentiate;
pub use eval::{bump_value, evaluate, smooth_step, smooth_step_slope, Point};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("`{name}` takes {expected} argument(s), got {found} (position {pos})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
}

/// A variable; `Q(i)` and `P(i)` are zero-based (`q1` is `Q(0)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Q(usize),
    P(usize),
    S,
    Sp,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Q(i) => write!(f, "q{}", i + 1),
            Var::P(i) => write!(f, "p{}", i + 1),
            Var::S => f.write_str("s"),
            Var::Sp => f.write_str("sp"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sgn,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
    /// `order`-th derivative in `r` of `bump(r; radius)`.
    Bump {
        order: u32,
        r: Box<Node>,
        radius: Box<Node>,
    },
}

impl Node {
    pub fn num(x: f64) -> Node {
        Node::Num(x)
    }

    pub fn var(v: Var) -> Node {
        Node::Var(v)
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Node::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Node::Num(_) | Node::Pi => {}
            Node::Var(v) => f(*v),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.visit_vars(f),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Node::Bump { r, radius, .. } => {
                r.visit_vars(f);
                radius.visit_vars(f);
            }
        }
    }

    /// Replaces every occurrence of `var` by `by`.
    fn substitute(&self, var: Var, by: &Node) -> Node {
        let sub = |n: &Node| Box::new(n.substitute(var, by));
        match self {
            Node::Var(v) if *v == var => by.clone(),
            Node::Num(_) | Node::Pi | Node::Var(_) => self.clone(),
            Node::Neg(a) => Node::Neg(sub(a)),
            Node::Add(a, b) => Node::Add(sub(a), sub(b)),
            Node::Sub(a, b) => Node::Sub(sub(a), sub(b)),
            Node::Mul(a, b) => Node::Mul(sub(a), sub(b)),
            Node::Div(a, b) => Node::Div(sub(a), sub(b)),
            Node::Pow(a, n) => Node::Pow(sub(a), *n),
            Node::Call(func, a) => Node::Call(*func, sub(a)),
            Node::Bump { order, r, radius } => Node::Bump {
                order: *order,
                r: sub(r),
                radius: sub(radius),
            },
        }
    }
}

// Smart constructors with constant folding; used by differentiation and by
// code that assembles expressions programmatically.

pub(crate) fn add(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Node::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Node::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Node::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Node::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        (None, Some(_)) => mul(b, a),
        (Some(x), None) => match b {
            Node::Mul(inner, rest) if inner.as_num().is_some() => {
                mul(Node::Num(x * inner.as_num().unwrap_or(1.0)), *rest)
            }
            b => Node::Mul(Box::new(a), Box::new(b)),
        },
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), _) if x == 0.0 => Node::Num(0.0),
        (Some(x), Some(y)) if y != 0.0 => Node::Num(x / y),
        (_, Some(y)) if y == 1.0 => a,
        (_, Some(y)) if y != 0.0 => match a {
            Node::Mul(c, rest) if c.as_num().is_some() => {
                mul(Node::Num(c.as_num().unwrap_or(1.0) / y), *rest)
            }
            a => Node::Div(Box::new(a), Box::new(b)),
        },
        _ => Node::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Node) -> Node {
    match a {
        Node::Num(x) => Node::Num(-x),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

pub(crate) fn pow(a: Node, n: i32) -> Node {
    match (a.as_num(), n) {
        (_, 0) => Node::Num(1.0),
        (_, 1) => a,
        (Some(x), _) if x != 0.0 || n > 0 => Node::Num(x.powi(n)),
        _ => Node::Pow(Box::new(a), n),
    }
}

pub(crate) fn call(func: Func, a: Node) -> Node {
    Node::Call(func, Box::new(a))
}

/// A parsed expression together with the phase-space dimension `n` its
/// variables were validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    pub fn new(root: Node, dim: usize) -> Self {
        Expr { root, dim }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Expr::new(Node::Num(value), dim)
    }

    pub fn zero(dim: usize) -> Self {
        Expr::constant(0.0, dim)
    }

    pub fn variable(var: Var, dim: usize) -> Self {
        Expr::new(Node::Var(var), dim)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut found = false;
        self.root.visit_vars(&mut |v| found |= v == var);
        found
    }

    /// Whether the expression mentions any `q` or `p` variable.
    pub fn depends_on_phase(&self) -> bool {
        let mut found = false;
        self.root
            .visit_vars(&mut |v| found |= matches!(v, Var::Q(_) | Var::P(_)));
        found
    }

    pub fn is_zero(&self) -> bool {
        self.root.as_num() == Some(0.0)
    }

    /// Replaces `var` by the expression `by`.
    pub fn substitute(&self, var: Var, by: &Expr) -> Expr {
        Expr::new(self.root.substitute(var, &by.root), self.dim)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::new(add(self.root.clone(), other.root.clone()), self.dim)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::new(sub(self.root.clone(), other.root.clone()), self.dim)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::new(mul(self.root.clone(), other.root.clone()), self.dim)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::new(mul(Node::Num(c), self.root.clone()), self.dim)
    }

    pub fn neg(&self) -> Expr {
        Expr::new(neg(self.root.clone()), self.dim)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.root {
            Node::Num(x) if x.is_sign_negative() => write!(f, "-{}", -x),
            _ => fmt::Display::fmt(&self.root, f),
        }
    }
}

#[cfg(test)]
mod tests;
