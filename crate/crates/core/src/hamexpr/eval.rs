use super::{Expr, ExprError, Func, Node, Var};

/// Values for the variables of an expression.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub q: &'a [f64],
    pub p: &'a [f64],
    pub s: f64,
    pub sp: f64,
}

impl<'a> Point<'a> {
    pub fn new(q: &'a [f64], p: &'a [f64], s: f64, sp: f64) -> Self {
        Point { q, p, s, sp }
    }

    fn get(&self, v: Var) -> Result<f64, ExprError> {
        let missing = || ExprError::Domain(format!("no value supplied for {v}"));
        match v {
            Var::Q(i) => self.q.get(i).copied().ok_or_else(missing),
            Var::P(i) => self.p.get(i).copied().ok_or_else(missing),
            Var::S => Ok(self.s),
            Var::Sp => Ok(self.sp),
        }
    }
}

/// Evaluates `expr` at `point`. Division by zero, a non-positive bump
/// radius and any non-finite intermediate value are domain errors.
pub fn evaluate(expr: &Expr, point: &Point<'_>) -> Result<f64, ExprError> {
    eval(expr.root(), point)
}

fn finite(x: f64, what: &str) -> Result<f64, ExprError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ExprError::Domain(format!("{what} is not finite")))
    }
}

fn eval(node: &Node, pt: &Point<'_>) -> Result<f64, ExprError> {
    Ok(match node {
        Node::Num(x) => *x,
        Node::Pi => std::f64::consts::PI,
        Node::Var(v) => pt.get(*v)?,
        Node::Neg(a) => -eval(a, pt)?,
        Node::Add(a, b) => finite(eval(a, pt)? + eval(b, pt)?, "sum")?,
        Node::Sub(a, b) => finite(eval(a, pt)? - eval(b, pt)?, "difference")?,
        Node::Mul(a, b) => finite(eval(a, pt)? * eval(b, pt)?, "product")?,
        Node::Div(a, b) => {
            let den = eval(b, pt)?;
            if den == 0.0 {
                return Err(ExprError::Domain(format!("division by zero in {node}")));
            }
            finite(eval(a, pt)? / den, "quotient")?
        }
        Node::Pow(a, n) => {
            let base = eval(a, pt)?;
            if base == 0.0 && *n < 0 {
                return Err(ExprError::Domain(format!("zero to a negative power in {node}")));
            }
            finite(base.powi(*n), "power")?
        }
        Node::Call(func, a) => {
            let x = eval(a, pt)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => finite(x.exp(), "exponential")?,
                Func::Abs => x.abs(),
                Func::Sgn => {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
            }
        }
        Node::Bump { order, r, radius } => {
            let r = eval(r, pt)?;
            let radius = eval(radius, pt)?;
            if radius <= 0.0 {
                return Err(ExprError::Domain(format!("bump radius {radius} is not positive")));
            }
            finite(bump_value(*order, r, radius), "bump")?
        }
    })
}

/// `order`-th derivative in `r` of `bump(r; radius)`, for `radius > 0`.
pub fn bump_value(order: u32, r: f64, radius: f64) -> f64 {
    let t = 2.0 * r / radius - 1.0;
    let k = order as usize;
    let s = smooth_step_jet(t, k);
    if k == 0 {
        return 1.0 - s[0];
    }
    let factorial: f64 = (1..=k).map(|j| j as f64).product();
    -(2.0 / radius).powi(order as i32) * factorial * s[k]
}

/// The smooth step `S(t)`: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    smooth_step_jet(t, 0)[0]
}

/// `S'(t)`.
pub fn smooth_step_slope(t: f64) -> f64 {
    smooth_step_jet(t, 1)[1]
}

// Below this argument exp(-1/x) and all its scaled derivatives are
// indistinguishable from zero in double precision.
const PSI_FLOOR: f64 = 1.0 / 700.0;

/// Taylor coefficients `S^{(j)}(t) / j!`, `j = 0..=k`, of the smooth step.
fn smooth_step_jet(t: f64, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    if t <= PSI_FLOOR {
        return out;
    }
    if t >= 1.0 - PSI_FLOOR {
        out[0] = 1.0;
        return out;
    }
    let mut x = vec![0.0; k + 1];
    x[0] = t;
    if k >= 1 {
        x[1] = 1.0;
    }
    let a = psi_jet(&x);
    x[0] = 1.0 - t;
    if k >= 1 {
        x[1] = -1.0;
    }
    let b = psi_jet(&x);
    let den: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
    jet_div(&a, &den)
}

fn psi_jet(x: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = jet_recip(x).into_iter().map(|c| -c).collect();
    jet_exp(&inv)
}

fn jet_recip(x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    y[0] = 1.0 / x[0];
    for n in 1..x.len() {
        let acc: f64 = (1..=n).map(|j| x[j] * y[n - j]).sum();
        y[n] = -acc / x[0];
    }
    y
}

fn jet_exp(u: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; u.len()];
    e[0] = u[0].exp();
    for n in 1..u.len() {
        let acc: f64 = (1..=n).map(|j| j as f64 * u[j] * e[n - j]).sum();
        e[n] = acc / n as f64;
    }
    e
}

fn jet_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; a.len()];
    for n in 0..a.len() {
        let acc: f64 = (1..=n).map(|j| b[j] * q[n - j]).sum();
        q[n] = (a[n] - acc) / b[0];
    }
    q
}
