use crate::hamexpr::{differentiate, evaluate, Expr, Point, Var};

use super::{NumericsError, Result};

/// `{F, G} = Σ ∂F/∂qi ∂G/∂pi - ∂F/∂pi ∂G/∂qi`.
pub fn poisson_bracket(f: &Expr, g: &Expr) -> Result<Expr> {
    if f.dim() != g.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let mut acc = Expr::zero(f.dim());
    for i in 0..f.dim() {
        let fq = differentiate(f, Var::Q(i));
        let fp = differentiate(f, Var::P(i));
        let gq = differentiate(g, Var::Q(i));
        let gp = differentiate(g, Var::P(i));
        acc = acc.add(&fq.mul(&gp)).sub(&fp.mul(&gq));
    }
    Ok(acc)
}

const MONOTONE_SAMPLES: usize = 1001;

/// `K_s = σ'(s) H_{σ(s)}`, whose flow is `φ^K_s = φ^H_{σ(s)}`.
///
/// `σ` must be an expression in `s` with `σ(0) = 0`, `σ(1) = 1` and
/// `σ' >= 0`; monotonicity is checked on 1001 equally spaced samples.
pub fn reparametrize(h: &Expr, sigma: &Expr) -> Result<Expr> {
    if sigma.depends_on_phase() || sigma.depends_on(Var::Sp) {
        return Err(NumericsError::InvalidParameter(format!(
            "reparametrization `{sigma}` must depend on s only"
        )));
    }
    let sigma = Expr::new(sigma.root().clone(), h.dim());
    let dsigma = differentiate(&sigma, Var::S);
    let zeros = vec![0.0; h.dim()];
    let at = |e: &Expr, s: f64| evaluate(e, &Point::new(&zeros, &zeros, s, 0.0));
    for (s, want) in [(0.0, 0.0), (1.0, 1.0)] {
        let got = at(&sigma, s)?;
        if (got - want).abs() > 1e-12 {
            return Err(NumericsError::InvalidParameter(format!(
                "σ({s}) = {got}, expected {want}"
            )));
        }
    }
    for k in 0..MONOTONE_SAMPLES {
        let s = k as f64 / (MONOTONE_SAMPLES - 1) as f64;
        let d = at(&dsigma, s)?;
        if d < 0.0 {
            return Err(NumericsError::NotMonotone(format!("σ'({s}) = {d}")));
        }
    }
    Ok(dsigma.mul(&h.substitute(Var::S, &sigma)))
}
