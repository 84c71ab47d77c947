//! End-to-end checks in the point model `M = pt`.
//!
//! Over a point, quantizing an isotopy with Hamiltonian `h(s)` acts on a
//! barcode as the translation by `c_h = ∫₀¹ h ds`, so both sides of the
//! energy bound can be computed independently: the distance exactly, the
//! bound by quadrature. Only this specialization is checked; the reports
//! do not claim anything about other base manifolds.

pub mod catalog;
mod suites;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::barcode::Barcode;
use crate::distances::{distance, DistanceError};
use crate::hamexpr::{Expr, ExprError};
use crate::numerics::{
    bound_b, build_interpolating_family, osc_norm, FamilyOptions, NumericsError, SampleCloud, ScalarPath, TimeGrid,
    DEFAULT_STEP,
};
use crate::relations::{find_certificate, CertificateError, RelationKind};
use crate::scalar::{Extended, Scalar};

pub use suites::{run_suite, run_suites, CaseRow, Suite, SuiteOutcome, SuiteReport, SuiteSizes};

/// Shifts are rounded to multiples of `1 / SHIFT_DENOMINATOR` before the
/// exact distance computation.
pub const SHIFT_DENOMINATOR: i64 = 1_000_000;

/// Default slack in the stability verdict.
pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

/// `c` rounded to the nearest multiple of `1 / SHIFT_DENOMINATOR`.
pub fn rationalize(c: f64) -> Result<Scalar> {
    Scalar::from_f64_rounded(c, SHIFT_DENOMINATOR)
        .ok_or_else(|| LabError::InvalidInput(format!("shift {c} cannot be rationalized")))
}

fn time_only(h: &Expr) -> Result<Expr> {
    if h.depends_on_phase() || h.depends_on(crate::hamexpr::Var::Sp) {
        return Err(LabError::InvalidInput(format!("`{h}` must depend on s only")));
    }
    Ok(Expr::new(h.root().clone(), 0))
}

/// The quantization of a Hamiltonian on `T*pt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointModelQuantization {
    h: Expr,
    shift: f64,
    rational: Scalar,
}

impl PointModelQuantization {
    pub fn new(h: &Expr) -> Result<Self> {
        let h = time_only(h)?;
        let shift = ScalarPath::new(h.clone())?.integral();
        Ok(PointModelQuantization {
            rational: rationalize(shift)?,
            h,
            shift,
        })
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    /// `c_h = ∫₀¹ h ds` (Simpson, 2001 nodes).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn rational_shift(&self) -> &Scalar {
        &self.rational
    }

    pub fn apply(&self, f: &Barcode) -> Barcode {
        f.translate(&self.rational)
    }
}

/// `(translate(F, c_h), c_h)`.
pub fn point_model_quantize(h: &Expr, f: &Barcode) -> Result<(Barcode, f64)> {
    let q = PointModelQuantization::new(h)?;
    Ok((q.apply(f), q.shift()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityOptions {
    pub grid: TimeGrid,
    pub tol: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            grid: TimeGrid::simpson(2001).expect("odd node count"),
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub h: String,
    pub f: String,
    pub c_h: f64,
    pub c: f64,
    /// `d_isom(F, T_{-c} T_{c_h} F)` from the rationalized shifts.
    pub distance: Extended,
    pub bound: f64,
    /// `∫ (max{h, 0} - min{h, 0})`, the bound with `f = 0` and 0 padded in.
    pub zero_f_bound: f64,
    pub tol: f64,
    /// `distance <= bound + tol`.
    pub holds: bool,
    /// `|c_h| <= zero_f_bound + tol`.
    pub zero_f_holds: bool,
    pub scope: &'static str,
}

/// Compares `d_isom(F, T_{-c} T_{c_h} F)` with `B = ∫ |h - f| ds`.
pub fn verify_metric_support_point(
    h: &Expr,
    f: &ScalarPath,
    barcode: &Barcode,
    options: &StabilityOptions,
) -> Result<StabilityReport> {
    if !(options.tol > 0.0) {
        return Err(LabError::InvalidInput("tolerance must be positive".into()));
    }
    let q = PointModelQuantization::new(h)?;
    let c = f.integral();
    let shift = q.rational_shift() - &rationalize(c)?;
    let moved = barcode.translate(&shift);
    let d = distance(RelationKind::Isom, barcode, &moved)?.value;

    let pt = SampleCloud::point_model();
    let h0 = q.hamiltonian();
    let f0 = ScalarPath::new(time_only(f.expr())?)?;
    let bound = bound_b(h0, &f0, &pt, &options.grid, DEFAULT_STEP)?;
    let zero_f_bound = osc_norm(h0, &pt, &options.grid, true)?;
    let holds = match &d {
        Extended::Finite(x) => x.to_f64() <= bound + options.tol,
        Extended::Infinite => false,
    };
    Ok(StabilityReport {
        h: h0.to_string(),
        f: f.expr().to_string(),
        c_h: q.shift(),
        c,
        distance: d,
        bound,
        zero_f_bound,
        tol: options.tol,
        holds,
        zero_f_holds: q.shift().abs() <= zero_f_bound + options.tol,
        scope: "point model only",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftIdentityOptions {
    pub eps: f64,
    pub grid: TimeGrid,
    pub tol: f64,
}

impl Default for ShiftIdentityOptions {
    fn default() -> Self {
        ShiftIdentityOptions {
            eps: 1e-2,
            grid: TimeGrid::default(),
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftIdentityReport {
    /// `∫ G_{0,s} ds`.
    pub c_g0: f64,
    /// `∫ G_{1,s} ds`.
    pub c_g1: f64,
    /// `∫ f̃`.
    pub c_ftilde: f64,
    /// `∫ h`, which `c_g1` should reproduce.
    pub c_h: f64,
    /// `|c_g0 - (c_g1 - c_ftilde)|`.
    pub residual: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Builds the interpolating family over a point and checks that the two
/// ends of it quantize to translations differing by `∫ f̃`.
pub fn verify_family_shift_identity(
    h: &Expr,
    f: &ScalarPath,
    options: &ShiftIdentityOptions,
) -> Result<ShiftIdentityReport> {
    let h0 = time_only(h)?;
    let f0 = ScalarPath::new(time_only(f.expr())?)?;
    let path = ScalarPath::new(h0.clone())?;
    let samples = options
        .grid
        .refined()
        .times()
        .iter()
        .map(|&s| path.at(s))
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = hi - lo + 2.0 * options.eps + 1.0;
    let family_options = FamilyOptions {
        grid: options.grid,
        ..FamilyOptions::default()
    };
    let fam = build_interpolating_family(&h0, &f0, &SampleCloud::point_model(), options.eps, range, &family_options)?;
    let c_g0 = fam.point_shift(0.0, &options.grid)?;
    let c_g1 = fam.point_shift(1.0, &options.grid)?;
    let c_ftilde = fam.metadata().expect("interpolating family").ftilde_integral;
    let h_values = options
        .grid
        .times()
        .iter()
        .map(|&s| path.at(s))
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let c_h = options.grid.integrate(&h_values);
    let residual = (c_g0 - (c_g1 - c_ftilde)).abs();
    Ok(ShiftIdentityReport {
        c_g0,
        c_g1,
        c_ftilde,
        c_h,
        residual,
        tol: options.tol,
        holds: residual <= options.tol && (c_g1 - c_h).abs() <= options.tol,
    })
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(num, a.denom() * b.denom())
}

/// Brute-force distance: the least `a + b` over the lattice `εZ² ∩ [0, span]²`
/// admitting a certificate, where `ε` is a quarter of the lattice unit of
/// the finite endpoints and `span` their spread. Uses only
/// [`find_certificate`], never the critical-value search.
pub fn eps_scan_distance(kind: RelationKind, f: &Barcode, g: &Barcode) -> Result<Extended> {
    if f.infinite_count() != g.infinite_count() {
        return Ok(Extended::Infinite);
    }
    let mut ends = f.finite_endpoints();
    ends.extend(g.finite_endpoints());
    ends.sort();
    ends.dedup();
    let (Some(lo), Some(hi)) = (ends.first(), ends.last()) else {
        return Ok(Extended::Finite(Scalar::zero()));
    };
    let span = hi - lo;
    let unit = ends
        .windows(2)
        .map(|w| (&w[1] - &w[0]).as_big().clone())
        .reduce(|x, y| rational_gcd(&x, &y))
        .unwrap_or_else(|| BigRational::from_integer(BigInt::from(1)));
    let eps = Scalar::from_big(unit) * Scalar::ratio(1, 4);
    let steps = (&span / &eps).to_f64().round() as i64;
    let mut best: Option<Scalar> = None;
    for i in 0..=steps {
        let a = &eps * &Scalar::from_int(i);
        for j in 0..=steps {
            let b = &eps * &Scalar::from_int(j);
            let total = &a + &b;
            if best.as_ref().is_some_and(|s| &total >= s) {
                break;
            }
            if find_certificate(kind, f, g, &a, &b)?.is_some() {
                best = Some(total);
                break;
            }
        }
    }
    Ok(best.map(Extended::Finite).unwrap_or(Extended::Infinite))
}
