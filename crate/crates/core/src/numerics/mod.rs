//! Hamiltonian flows on `T*R^n`, oscillation norms and energy bounds.
//!
//! Phase points are stored as `[q1..qn, p1..pn]`. The Hamiltonian vector
//! field is `X_H = (∂H/∂p, -∂H/∂q)`, the Poisson bracket is
//! `{F, G} = Σ ∂F/∂qi ∂G/∂pi - ∂F/∂pi ∂G/∂qi`, and the bracket of vector
//! fields is `[X, Y] = DX·Y - DY·X`. With these choices
//! `X_{{F,G}} = [X_F, X_G]`.
//!
//! A closed set `A` is represented by a finite [`SampleCloud`], so maxima
//! over `A` are under-approximated and minima over-approximated.

mod clamp;
mod family;
mod flow;
mod ops;
mod osc;

use serde::Serialize;
use thiserror::Error;

use crate::hamexpr::{evaluate, Expr, ExprError, Point};

pub use clamp::{smooth_clamp, ClampJet, SmoothClamp};
pub use family::{
    build_interpolating_family, check_sprime_independence, verify_vector_field_identity,
    FamilyMetadata, FamilyOptions, IdentityOptions, IdentityReport, IndependenceReport, TwoParamFamily,
};
pub use flow::{
    flow, hamiltonian_vector_field, integrate, integrate_through, Hamiltonian, DEFAULT_STEP,
};
pub use ops::{poisson_bracket, reparametrize};
pub use osc::{advected_extrema, bound_b, osc_norm, osc_norm_restricted, Extrema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("trajectory left the representable range at s = {s}")]
    NonFinite { s: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sample cloud is empty")]
    EmptyCloud,
    #[error("envelope construction failed: {0}")]
    EnvelopeFailure(String),
    #[error("finite-difference noise {noise:e} on the zero family exceeds {limit:e}")]
    StepTooCoarse { noise: f64, limit: f64 },
    #[error("reparametrization is not monotone: {0}")]
    NotMonotone(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(NumericsError::InvalidParameter(
                "phase point coordinates must be finite".into(),
            ));
        }
        Ok(PhasePoint { q, p })
    }

    /// The unique point of `T*R^0`.
    pub fn origin(dim: usize) -> Self {
        PhasePoint {
            q: vec![0.0; dim],
            p: vec![0.0; dim],
        }
    }

    /// Splits a `[q.., p..]` row.
    pub fn from_state(state: &[f64]) -> Self {
        let n = state.len() / 2;
        PhasePoint {
            q: state[..n].to_vec(),
            p: state[n..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn state(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.extend_from_slice(&self.p);
        v
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.state()
            .iter()
            .zip(other.state())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCloud {
    points: Vec<PhasePoint>,
    pub label: Option<String>,
}

impl SampleCloud {
    pub fn new(points: Vec<PhasePoint>) -> Result<Self> {
        let first = points.first().ok_or(NumericsError::EmptyCloud)?;
        let n = first.dim();
        if let Some(bad) = points.iter().find(|z| z.dim() != n) {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(SampleCloud {
            points,
            label: None,
        })
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// The single point of `T*R^0`.
    pub fn point_model() -> Self {
        SampleCloud {
            points: vec![PhasePoint::origin(0)],
            label: Some("pt".into()),
        }
    }

    /// Regular grid with `per_axis` nodes per coordinate on `[-half, half]^{2n}`.
    pub fn box_grid(dim: usize, half: f64, per_axis: usize) -> Result<Self> {
        if per_axis < 2 || half <= 0.0 {
            return Err(NumericsError::InvalidParameter(
                "box grid needs at least 2 nodes per axis and positive extent".into(),
            ));
        }
        let axis: Vec<f64> = (0..per_axis)
            .map(|i| -half + 2.0 * half * i as f64 / (per_axis - 1) as f64)
            .collect();
        let mut rows: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..2 * dim {
            rows = rows
                .into_iter()
                .flat_map(|row| {
                    axis.iter().map(move |&x| {
                        let mut r = row.clone();
                        r.push(x);
                        r
                    })
                })
                .collect();
        }
        SampleCloud::new(rows.iter().map(|r| PhasePoint::from_state(r)).collect())
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(NumericsError::DimensionMismatch {
                expected: n,
                found: self.dim(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    /// Composite Simpson; needs an odd number of nodes.
    Simpson,
}

/// Uniform partition of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    nodes: usize,
    pub rule: Quadrature,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            nodes: 1001,
            rule: Quadrature::Trapezoid,
        }
    }
}

impl TimeGrid {
    pub fn new(nodes: usize, rule: Quadrature) -> Result<Self> {
        if nodes < 2 {
            return Err(NumericsError::InvalidParameter(
                "a time grid needs at least two nodes".into(),
            ));
        }
        if rule == Quadrature::Simpson && nodes % 2 == 0 {
            return Err(NumericsError::InvalidParameter(
                "Simpson's rule needs an odd number of nodes".into(),
            ));
        }
        Ok(TimeGrid { nodes, rule })
    }

    pub fn trapezoid(nodes: usize) -> Result<Self> {
        TimeGrid::new(nodes, Quadrature::Trapezoid)
    }

    pub fn simpson(nodes: usize) -> Result<Self> {
        TimeGrid::new(nodes, Quadrature::Simpson)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.nodes - 1) as f64;
        (0..self.nodes).map(|k| k as f64 / last).collect()
    }

    /// Integrates samples taken at [`TimeGrid::times`]; sums run in index order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes, "one value per grid node");
        let h = self.step();
        let last = self.nodes - 1;
        match self.rule {
            Quadrature::Trapezoid => {
                let inner: f64 = values[1..last].iter().sum();
                h * (inner + 0.5 * (values[0] + values[last]))
            }
            Quadrature::Simpson => {
                let mut acc = values[0] + values[last];
                for (k, v) in values.iter().enumerate().take(last).skip(1) {
                    acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                acc * h / 3.0
            }
        }
    }

    /// The grid with every interval halved.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            nodes: 2 * self.nodes - 1,
            rule: self.rule,
        }
    }
}

/// A scalar function of `s` with its cached integral over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    f: Expr,
    integral: f64,
}

impl ScalarPath {
    /// Caches `c = ∫₀¹ f` with Simpson's rule on 2001 nodes.
    pub fn new(f: Expr) -> Result<Self> {
        if f.depends_on_phase() || f.depends_on(crate::hamexpr::Var::Sp) {
            return Err(NumericsError::InvalidParameter(format!(
                "`{f}` must depend on s only"
            )));
        }
        let grid = TimeGrid::simpson(2001)?;
        let values = grid
            .times()
            .iter()
            .map(|&s| eval_path(&f, s))
            .collect::<Result<Vec<_>>>()?;
        let integral = grid.integrate(&values);
        Ok(ScalarPath { f, integral })
    }

    pub fn zero() -> Self {
        ScalarPath {
            f: Expr::zero(0),
            integral: 0.0,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn at(&self, s: f64) -> Result<f64> {
        eval_path(&self.f, s)
    }

    /// `c = ∫₀¹ f(s) ds`.
    pub fn integral(&self) -> f64 {
        self.integral
    }
}

fn eval_path(f: &Expr, s: f64) -> Result<f64> {
    let zeros = vec![0.0; f.dim()];
    Ok(evaluate(f, &Point::new(&zeros, &zeros, s, 0.0))?)
}

#[cfg(test)]
mod tests;
