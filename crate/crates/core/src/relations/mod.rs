//! Interleavings, weak isomorphisms and isomorphisms between barcodes.
//!
//! For shifts `a, b >= 0` a pair `(F, G)` is
//!
//! * *(a,b)-isomorphic* if there are `α: F -> T_a G` and `β: G -> T_b F` with
//!   `T_a β ∘ α = τ_{0,a+b}(F)` and `T_b α ∘ β = τ_{0,a+b}(G)`;
//! * *(a,b)-interleaved* if there are `α, δ: F -> T_a G` and
//!   `β, γ: G -> T_b F` with `T_a β ∘ α = τ_{0,a+b}(F)` and
//!   `T_b δ ∘ γ = τ_{0,a+b}(G)`;
//! * *weakly (a,b)-isomorphic* if in addition `τ_{a,2a}(G) ∘ α = τ_{a,2a}(G) ∘ δ`
//!   and `τ_{b,2b}(F) ∘ β = τ_{b,2b}(F) ∘ γ`.
//!
//! Over F₂ the unknown matrices turn these conditions into a quadratic system
//! that [`find_certificate`] solves exactly.

mod solver;

use serde::Serialize;
use thiserror::Error;

use crate::barcode::{compose, hom_allowed, hom_pattern, tau_morphism, Barcode, Field, HomMask, ModelError, Morphism};
use crate::scalar::{Extended, Scalar};

use solver::{solve_lex_min, Equation, Outcome};

/// Default bound on the free unknowns of one independent block of the
/// certificate system.
pub const DEFAULT_UNKNOWN_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("certificate search too large: {unknowns} coupled unknowns exceed the cap of {cap}")]
    SizeExceeded { unknowns: usize, cap: usize },
    #[error("{0} is not translation rigid")]
    RigidityViolated(&'static str),
    #[error("promoted certificate failed verification")]
    PromotionFailed,
    #[error("certificate search is only implemented over F_2, not F_{0}")]
    UnsupportedField(u32),
    #[error("shifts must be nonnegative, got a = {a}, b = {b}")]
    NegativeShift { a: Scalar, b: Scalar },
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Interleaved,
    WeakIsom,
    Isom,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [RelationKind::Interleaved, RelationKind::WeakIsom, RelationKind::Isom];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Interleaved => "int",
            RelationKind::WeakIsom => "wisom",
            RelationKind::Isom => "isom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub kind: RelationKind,
    pub a: Scalar,
    pub b: Scalar,
    pub alpha: Morphism,
    pub beta: Morphism,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Morphism>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Morphism>,
}

impl Certificate {
    pub fn isom(a: Scalar, b: Scalar, alpha: Morphism, beta: Morphism) -> Self {
        Certificate {
            kind: RelationKind::Isom,
            a,
            b,
            alpha,
            beta,
            gamma: None,
            delta: None,
        }
    }

    /// Reads the certificate as one of a weaker kind. An isomorphism becomes
    /// a weak isomorphism with `γ = β` and `δ = α`.
    pub fn weakened(&self, kind: RelationKind) -> Certificate {
        let gamma = self.gamma.clone().unwrap_or_else(|| self.beta.clone());
        let delta = self.delta.clone().unwrap_or_else(|| self.alpha.clone());
        let mut out = self.clone();
        out.kind = kind;
        if kind != RelationKind::Isom {
            out.gamma = Some(gamma);
            out.delta = Some(delta);
        }
        out
    }

    /// `(γ, δ)`, which coincide with `(β, α)` for an isomorphism certificate.
    fn second_pair(&self) -> Result<(&Morphism, &Morphism), CertificateError> {
        match self.kind {
            RelationKind::Isom => Ok((&self.beta, &self.alpha)),
            _ => match (&self.gamma, &self.delta) {
                (Some(g), Some(d)) => Ok((g, d)),
                _ => Err(CertificateError::Malformed(format!(
                    "{} certificate needs gamma and delta",
                    self.kind.name()
                ))),
            },
        }
    }
}

fn check_shifts(a: &Scalar, b: &Scalar) -> Result<(), CertificateError> {
    if a.is_negative() || b.is_negative() {
        return Err(CertificateError::NegativeShift {
            a: a.clone(),
            b: b.clone(),
        });
    }
    Ok(())
}

/// Whether `m` is a morphism `from -> T_shift to`.
fn has_type(m: &Morphism, from: &Barcode, to: &Barcode, shift: &Scalar) -> bool {
    m.source() == from && m.codomain() == to.translate(shift)
}

/// Checks every condition of the declared kind exactly.
pub fn verify_certificate(f: &Barcode, g: &Barcode, cert: &Certificate) -> Result<bool, CertificateError> {
    check_shifts(&cert.a, &cert.b)?;
    let (gamma, delta) = cert.second_pair()?;
    for (name, m) in [("alpha", &cert.alpha), ("beta", &cert.beta), ("gamma", gamma), ("delta", delta)] {
        m.check_support()
            .map_err(|e| CertificateError::Malformed(format!("{name}: {e}")))?;
    }
    let (a, b) = (&cert.a, &cert.b);
    let typed = has_type(&cert.alpha, f, g, a)
        && has_type(delta, f, g, a)
        && has_type(&cert.beta, g, f, b)
        && has_type(gamma, g, f, b);
    if !typed {
        return Ok(false);
    }
    // Same codomain means same mask, so the matrices carry over verbatim.
    let alpha = Morphism::from_entries(f, g, a, cert.alpha.entries())?;
    let delta = &Morphism::from_entries(f, g, a, delta.entries())?;
    let beta = Morphism::from_entries(g, f, b, cert.beta.entries())?;
    let gamma = &Morphism::from_entries(g, f, b, gamma.entries())?;
    let ab = a + b;
    let zero = Scalar::zero();
    // compose(β, α) translates β by a implicitly: T_a β ∘ α.
    if compose(&beta, &alpha)? != tau_morphism(f, &zero, &ab)? {
        return Ok(false);
    }
    if compose(delta, gamma)? != tau_morphism(g, &zero, &ab)? {
        return Ok(false);
    }
    if cert.kind == RelationKind::WeakIsom {
        // τ_{a,2a}(G) ∘ α, written as τ_{0,a}(G) applied after α.
        let tau_g = tau_morphism(g, &zero, a)?;
        if compose(&tau_g, &alpha)? != compose(&tau_g, delta)? {
            return Ok(false);
        }
        let tau_f = tau_morphism(f, &zero, b)?;
        if compose(&tau_f, &beta)? != compose(&tau_f, gamma)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unknown positions of one morphism: `index[row * cols + col]` is the
/// variable number of an allowed position.
struct Unknowns {
    mask: HomMask,
    index: Vec<Option<usize>>,
}

/// Order in which a matrix's unknowns are numbered.
#[derive(Clone, Copy)]
enum Order {
    RowMajor,
    ColumnMajor,
}

impl Unknowns {
    fn new(mask: HomMask, order: Order, next: &mut usize) -> Self {
        let mut index = vec![None; mask.rows() * mask.cols()];
        let mut positions: Vec<(usize, usize)> = mask.positions().collect();
        if let Order::ColumnMajor = order {
            positions.sort_by_key(|&(r, c)| (c, r));
        }
        for (r, c) in positions {
            index[r * mask.cols() + c] = Some(*next);
            *next += 1;
        }
        Unknowns { mask, index }
    }

    fn var(&self, row: usize, col: usize) -> Option<usize> {
        self.index[row * self.mask.cols() + col]
    }

    fn morphism(
        &self,
        source: &Barcode,
        target: &Barcode,
        shift: &Scalar,
        values: &[bool],
    ) -> Result<Morphism, ModelError> {
        let positions: Vec<(usize, usize)> = self
            .mask
            .positions()
            .filter(|&(r, c)| values[self.var(r, c).expect("allowed position")])
            .collect();
        Morphism::from_generators(source, target, shift, &positions)
    }
}

/// Equations of `T_x second ∘ first = τ_{0,x+y}(obj)` for `first: obj -> T_x other`,
/// `second: other -> T_y obj`.
fn composite_equations(obj: &Barcode, total: &Scalar, first: &Unknowns, second: &Unknowns, out: &mut Vec<Equation>) {
    let total_ext = Extended::Finite(total.clone());
    let bars = obj.bars();
    let middle = first.mask.rows();
    for (i, bi) in bars.iter().enumerate() {
        for (j, bj) in bars.iter().enumerate() {
            if !hom_allowed(bj, bi, total) {
                continue;
            }
            let mut eq = Equation::new(i == j && total_ext < bi.length());
            for k in 0..middle {
                if let (Some(x), Some(y)) = (second.var(i, k), first.var(k, j)) {
                    eq.quadratic.push((x, y));
                }
            }
            out.push(eq);
        }
    }
}

/// Equations `x[i,j] = y[i,j]` wherever `τ_{0,s}(dst) ∘ -` keeps position
/// `(i, j)` of morphisms `src -> T_s dst`.
fn agreement_equations(src: &Barcode, dst: &Barcode, s: &Scalar, x: &Unknowns, y: &Unknowns, out: &mut Vec<Equation>) {
    let s_ext = Extended::Finite(s.clone());
    let two_s = s.double();
    for (i, di) in dst.bars().iter().enumerate() {
        if s_ext >= di.length() {
            continue;
        }
        for (j, sj) in src.bars().iter().enumerate() {
            if !hom_allowed(sj, di, &two_s) {
                continue;
            }
            if let (Some(u), Some(v)) = (x.var(i, j), y.var(i, j)) {
                let mut eq = Equation::new(false);
                eq.linear = vec![u, v];
                out.push(eq);
            }
        }
    }
}

/// Searches for a certificate of `kind` at shifts `(a, b)` with the default
/// cap; see [`find_certificate_capped`].
pub fn find_certificate(
    kind: RelationKind,
    f: &Barcode,
    g: &Barcode,
    a: &Scalar,
    b: &Scalar,
) -> Result<Option<Certificate>, CertificateError> {
    find_certificate_capped(kind, f, g, a, b, DEFAULT_UNKNOWN_CAP)
}

/// Exact search over F₂. Returns the lexicographically smallest solution,
/// or `None` when no assignment satisfies the conditions.
///
/// Unknowns are ordered α, β, γ, δ. The right-hand factors of the composites
/// (α and γ) are numbered column by column and the left-hand factors (β and
/// δ) row by row: a composite entry becomes linear in the other factor as
/// soon as one column, respectively row, is known, which lets the search
/// prune early.
///
/// `cap` bounds the unknowns of each independent block left after forced
/// entries and equalities have been eliminated.
pub fn find_certificate_capped(
    kind: RelationKind,
    f: &Barcode,
    g: &Barcode,
    a: &Scalar,
    b: &Scalar,
    cap: usize,
) -> Result<Option<Certificate>, CertificateError> {
    check_shifts(a, b)?;
    for field in [f.field(), g.field()] {
        if field != Field::F2 {
            return Err(CertificateError::UnsupportedField(field.characteristic()));
        }
    }
    let ab = a + b;
    let mut next = 0;
    let alpha = Unknowns::new(hom_pattern(f, g, a), Order::ColumnMajor, &mut next);
    let beta = Unknowns::new(hom_pattern(g, f, b), Order::RowMajor, &mut next);
    let second = match kind {
        RelationKind::Isom => None,
        _ => {
            let gamma = Unknowns::new(hom_pattern(g, f, b), Order::ColumnMajor, &mut next);
            let delta = Unknowns::new(hom_pattern(f, g, a), Order::RowMajor, &mut next);
            Some((gamma, delta))
        }
    };

    let mut eqs = Vec::new();
    composite_equations(f, &ab, &alpha, &beta, &mut eqs);
    match &second {
        None => composite_equations(g, &ab, &beta, &alpha, &mut eqs),
        Some((gamma, delta)) => {
            composite_equations(g, &ab, gamma, delta, &mut eqs);
            if kind == RelationKind::WeakIsom {
                agreement_equations(f, g, a, &alpha, delta, &mut eqs);
                agreement_equations(g, f, b, &beta, gamma, &mut eqs);
            }
        }
    }

    let values = match solve_lex_min(next, &eqs, cap) {
        Outcome::Solution(v) => v,
        Outcome::Infeasible => return Ok(None),
        Outcome::TooLarge { block } => return Err(CertificateError::SizeExceeded { unknowns: block, cap }),
    };
    let alpha_m = alpha.morphism(f, g, a, &values)?;
    let beta_m = beta.morphism(g, f, b, &values)?;
    let (gamma_m, delta_m) = match &second {
        None => (None, None),
        Some((gamma, delta)) => (
            Some(gamma.morphism(g, f, b, &values)?),
            Some(delta.morphism(f, g, a, &values)?),
        ),
    };
    Ok(Some(Certificate {
        kind,
        a: a.clone(),
        b: b.clone(),
        alpha: alpha_m,
        beta: beta_m,
        gamma: gamma_m,
        delta: delta_m,
    }))
}

/// A maximal shift interval `[from, to)` on which `dim Hom(F, T_d F)` is
/// constant; `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomRegion {
    pub from: Option<Scalar>,
    pub to: Option<Scalar>,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RigidityReport {
    pub is_rigid: bool,
    pub hom_profile: Vec<HomRegion>,
}

/// Shift values where some position of `Hom(F, T_d G)` switches on or off.
/// Each position is allowed exactly on `[max(a - c, b - d), b - c)`.
pub fn hom_breakpoints(f: &Barcode, g: &Barcode) -> Vec<Scalar> {
    let mut out = vec![];
    for src in f.bars() {
        for dst in g.bars() {
            out.push(src.birth() - dst.birth());
            if let Some(b) = src.death().finite() {
                out.push(b - dst.birth());
                if let Some(d) = dst.death().finite() {
                    out.push(b - d);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `dim Hom(F, T_d F)` region by region, and whether it is `1` for all
/// `d >= 0` and `0` for all `d < 0`.
pub fn is_translation_rigid(f: &Barcode) -> RigidityReport {
    let mut cuts = hom_breakpoints(f, f);
    cuts.push(Scalar::zero());
    cuts.sort();
    cuts.dedup();

    let mut profile = Vec::with_capacity(cuts.len() + 1);
    let first = &cuts[0] - &Scalar::one();
    profile.push(HomRegion {
        from: None,
        to: Some(cuts[0].clone()),
        dimension: hom_pattern(f, f, &first).dimension(),
    });
    for (k, cut) in cuts.iter().enumerate() {
        profile.push(HomRegion {
            from: Some(cut.clone()),
            to: cuts.get(k + 1).cloned(),
            dimension: hom_pattern(f, f, cut).dimension(),
        });
    }
    // Merge neighbours with equal dimension on the same side of 0.
    let mut merged: Vec<HomRegion> = Vec::with_capacity(profile.len());
    for region in profile {
        if let Some(last) = merged.last_mut() {
            let crosses_zero = region.from.as_ref().is_some_and(|s| s.is_zero());
            if last.dimension == region.dimension && !crosses_zero {
                last.to = region.to;
                continue;
            }
        }
        merged.push(region);
    }
    let is_rigid = merged.iter().all(|r| {
        let nonnegative = r.from.as_ref().is_some_and(|s| !s.is_negative());
        r.dimension == usize::from(nonnegative)
    });
    RigidityReport {
        is_rigid,
        hom_profile: merged,
    }
}

/// Turns a weak (a,b)-isomorphism between rigid objects into an
/// (a,b)-isomorphism built from the same `(α, β)`.
///
/// For rigid objects `τ_{a,2a} ∘ -` is injective on the relevant Hom spaces,
/// so condition (3) forces `α = δ` and `β = γ`; the result is re-verified
/// rather than assumed.
pub fn promote_weak_to_isom(f: &Barcode, g: &Barcode, cert: &Certificate) -> Result<Certificate, CertificateError> {
    if cert.kind != RelationKind::WeakIsom {
        return Err(CertificateError::Malformed(format!(
            "expected a wisom certificate, got {}",
            cert.kind.name()
        )));
    }
    if !verify_certificate(f, g, cert)? {
        return Err(CertificateError::Malformed("weak certificate does not verify".into()));
    }
    if !is_translation_rigid(f).is_rigid {
        return Err(CertificateError::RigidityViolated("F"));
    }
    if !is_translation_rigid(g).is_rigid {
        return Err(CertificateError::RigidityViolated("G"));
    }
    let promoted = Certificate::isom(cert.a.clone(), cert.b.clone(), cert.alpha.clone(), cert.beta.clone());
    if verify_certificate(f, g, &promoted)? {
        Ok(promoted)
    } else {
        Err(CertificateError::PromotionFailed)
    }
}

#[cfg(test)]
mod tests;
