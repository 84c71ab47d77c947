use crate::hamexpr::{differentiate, evaluate, Expr, Point, Var};

use super::{NumericsError, PhasePoint, Result};

pub const DEFAULT_STEP: f64 = 1e-3;

/// A Hamiltonian with its symbolic gradient precomputed.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    expr: Expr,
    dq: Vec<Expr>,
    dp: Vec<Expr>,
}

impl Hamiltonian {
    pub fn new(expr: Expr) -> Self {
        let n = expr.dim();
        let dq = (0..n).map(|i| differentiate(&expr, Var::Q(i))).collect();
        let dp = (0..n).map(|i| differentiate(&expr, Var::P(i))).collect();
        Hamiltonian { expr, dq, dp }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn value(&self, state: &[f64], s: f64, sp: f64) -> Result<f64> {
        let n = self.dim();
        Ok(evaluate(
            &self.expr,
            &Point::new(&state[..n], &state[n..], s, sp),
        )?)
    }

    /// `(∂H/∂q, ∂H/∂p)` as one `2n` vector.
    pub fn gradient(&self, state: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let pt = Point::new(&state[..n], &state[n..], s, sp);
        let mut out = Vec::with_capacity(2 * n);
        for e in self.dq.iter().chain(&self.dp) {
            out.push(evaluate(e, &pt)?);
        }
        Ok(out)
    }

    /// `X_H = (∂H/∂p, -∂H/∂q)`.
    pub fn field(&self, state: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        Ok(symplectic_gradient(&self.gradient(state, s, sp)?))
    }
}

/// Turns `(∂H/∂q, ∂H/∂p)` into `(∂H/∂p, -∂H/∂q)`.
pub(crate) fn symplectic_gradient(grad: &[f64]) -> Vec<f64> {
    let n = grad.len() / 2;
    let mut x = Vec::with_capacity(2 * n);
    x.extend_from_slice(&grad[n..]);
    x.extend(grad[..n].iter().map(|g| -g));
    x
}

fn check_dim(h: &Expr, z: &PhasePoint) -> Result<()> {
    if h.dim() == z.dim() {
        Ok(())
    } else {
        Err(NumericsError::DimensionMismatch {
            expected: h.dim(),
            found: z.dim(),
        })
    }
}

/// `X_{H_s}(z)` split into `(dq/ds, dp/ds)`.
pub fn hamiltonian_vector_field(h: &Expr, z: &PhasePoint, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(h, z)?;
    let x = Hamiltonian::new(h.clone()).field(&z.state(), s, 0.0)?;
    let n = z.dim();
    Ok((x[..n].to_vec(), x[n..].to_vec()))
}

/// Time-`s0` to time-`s1` map of the flow of `H`, by classical RK4.
pub fn flow(h: &Expr, z0: &PhasePoint, s0: f64, s1: f64, step: f64) -> Result<PhasePoint> {
    check_dim(h, z0)?;
    let ham = Hamiltonian::new(h.clone());
    let end = integrate(|z, s| ham.field(z, s, 0.0), &z0.state(), s0, s1, step)?;
    Ok(PhasePoint::from_state(&end))
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(NumericsError::InvalidParameter(format!(
            "integration step must be positive, got {step}"
        )))
    }
}

/// Integrates `dz/ds = field(z, s)` from `s0` to `s1` (either direction)
/// using `ceil(|s1 - s0| / step)` equal RK4 steps.
pub fn integrate<F>(field: F, z0: &[f64], s0: f64, s1: f64, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    check_step(step)?;
    let mut z = z0.to_vec();
    advance(&field, &mut z, s0, s1, step)?;
    Ok(z)
}

/// States at each of `times`, integrating from `times[0]` where the state
/// is `z0`.
pub fn integrate_through<F>(field: F, z0: &[f64], times: &[f64], step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    check_step(step)?;
    let mut out = Vec::with_capacity(times.len());
    let mut z = z0.to_vec();
    let mut prev = match times.first() {
        Some(&t) => t,
        None => return Ok(out),
    };
    for &t in times {
        advance(&field, &mut z, prev, t, step)?;
        out.push(z.clone());
        prev = t;
    }
    Ok(out)
}

fn advance<F>(field: &F, z: &mut Vec<f64>, s0: f64, s1: f64, step: f64) -> Result<()>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    if s0 == s1 || z.is_empty() {
        return Ok(());
    }
    let steps = ((s1 - s0).abs() / step).ceil().max(1.0) as usize;
    let h = (s1 - s0) / steps as f64;
    let mut tmp = vec![0.0; z.len()];
    for k in 0..steps {
        let s = s0 + k as f64 * h;
        let k1 = field(z, s)?;
        axpy(&mut tmp, z, 0.5 * h, &k1);
        let k2 = field(&tmp, s + 0.5 * h)?;
        axpy(&mut tmp, z, 0.5 * h, &k2);
        let k3 = field(&tmp, s + 0.5 * h)?;
        axpy(&mut tmp, z, h, &k3);
        let k4 = field(&tmp, s + h)?;
        for i in 0..z.len() {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::NonFinite { s: s + h });
        }
    }
    Ok(())
}

fn axpy(out: &mut [f64], z: &[f64], a: f64, x: &[f64]) {
    for i in 0..z.len() {
        out[i] = z[i] + a * x[i];
    }
}
