//! Exact certificate distances `d_int`, `d_w-isom` and `d_isom`.
//!
//! `d_kind(F, G)` is the infimum of `a + b` over shifts at which a certificate
//! of that kind exists. Every Hom condition entering a certificate compares
//! one of `a`, `b`, `2a`, `2b`, `a + b` with an endpoint difference, always in
//! the form "`x >= θ`" or "`x < θ`". Feasibility is therefore constant on
//! cells that are closed on the left, it is upward closed (compose with τ),
//! and the infimum is attained on the boundary of a cell.
//!
//! The search walks `a` over the critical candidates (differences and half
//! differences of endpoints). For each `a` the smallest feasible `b` lies in
//! the candidates or at `θ - a` for a difference `θ`; it is found by binary
//! search since feasibility is monotone in `b`.

use serde::Serialize;
use thiserror::Error;

use crate::barcode::{hom_pattern, Barcode, Morphism};
use crate::relations::{
    find_certificate_capped, hom_breakpoints, Certificate, CertificateError, RelationKind, DEFAULT_UNKNOWN_CAP,
};
use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("exact value unavailable: bracket [{lower}, {upper}] ({source})")]
    SizeExceeded {
        lower: Extended,
        upper: Extended,
        source: CertificateError,
    },
    #[error(transparent)]
    Certificate(#[from] CertificateError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceResult {
    pub kind: RelationKind,
    pub value: Extended,
    pub attained: bool,
    pub optimal_pair: Option<(Scalar, Scalar)>,
    pub certificate: Option<Certificate>,
    /// False when some probe exceeded the search cap; `value` is then the
    /// upper end of `[lower, upper]`.
    pub exact: bool,
    pub lower: Extended,
    pub upper: Extended,
}

/// Nonnegative differences of finite endpoints (with 0).
fn differences(f: &Barcode, g: &Barcode) -> Vec<Scalar> {
    let mut ends = f.finite_endpoints();
    ends.extend(g.finite_endpoints());
    ends.sort();
    ends.dedup();
    let mut out = vec![Scalar::zero()];
    for (i, x) in ends.iter().enumerate() {
        for y in &ends[i + 1..] {
            out.push(y - x);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `0`, `|e - e'|` and `|e - e'| / 2` over finite endpoints of `F ∪ G`.
pub fn critical_candidates(f: &Barcode, g: &Barcode) -> Vec<Scalar> {
    let diffs = differences(f, g);
    let mut out: Vec<Scalar> = diffs.iter().flat_map(|d| [d.clone(), d.half()]).collect();
    out.sort();
    out.dedup();
    out
}

enum Probe {
    Feasible(Certificate),
    Infeasible,
    Unknown(CertificateError),
}

struct Searcher<'a> {
    kind: RelationKind,
    f: &'a Barcode,
    g: &'a Barcode,
    cap: usize,
    probes: usize,
}

impl Searcher<'_> {
    fn probe(&mut self, a: &Scalar, b: &Scalar) -> Result<Probe, CertificateError> {
        self.probes += 1;
        match find_certificate_capped(self.kind, self.f, self.g, a, b, self.cap) {
            Ok(Some(cert)) => Ok(Probe::Feasible(cert)),
            Ok(None) => Ok(Probe::Infeasible),
            Err(e @ CertificateError::SizeExceeded { .. }) => Ok(Probe::Unknown(e)),
            Err(e) => Err(e),
        }
    }
}

/// Certificate at `(s, s)` for `s` the endpoint span, pairing infinite bars
/// in order; the composites kill every finite bar. Needs equal numbers of
/// infinite bars.
fn matching_certificate(kind: RelationKind, f: &Barcode, g: &Barcode) -> Option<Certificate> {
    let ends = critical_candidates(f, g);
    let span = ends.last().cloned().unwrap_or_else(Scalar::zero);
    let inf_f: Vec<usize> = (0..f.len()).filter(|&i| f.bars()[i].is_infinite()).collect();
    let inf_g: Vec<usize> = (0..g.len()).filter(|&i| g.bars()[i].is_infinite()).collect();
    if inf_f.len() != inf_g.len() {
        return None;
    }
    let alpha_pos: Vec<_> = inf_f.iter().zip(&inf_g).map(|(&j, &i)| (i, j)).collect();
    let beta_pos: Vec<_> = inf_g.iter().zip(&inf_f).map(|(&j, &i)| (i, j)).collect();
    let alpha = Morphism::from_generators(f, g, &span, &alpha_pos).ok()?;
    let beta = Morphism::from_generators(g, f, &span, &beta_pos).ok()?;
    Some(Certificate::isom(span.clone(), span, alpha, beta).weakened(kind))
}

pub fn distance(kind: RelationKind, f: &Barcode, g: &Barcode) -> Result<DistanceResult, DistanceError> {
    distance_capped(kind, f, g, DEFAULT_UNKNOWN_CAP)
}

pub fn distance_capped(kind: RelationKind, f: &Barcode, g: &Barcode, cap: usize) -> Result<DistanceResult, DistanceError> {
    if f.infinite_count() != g.infinite_count() {
        return Ok(DistanceResult {
            kind,
            value: Extended::Infinite,
            attained: false,
            optimal_pair: None,
            certificate: None,
            exact: true,
            lower: Extended::Infinite,
            upper: Extended::Infinite,
        });
    }
    let candidates = critical_candidates(f, g);
    let diffs = differences(f, g);
    let mut search = Searcher {
        kind,
        f,
        g,
        cap,
        probes: 0,
    };

    // (a + b, a, b, certificate) of the best feasible probe so far.
    let mut best: Option<(Scalar, Scalar, Scalar, Certificate)> = None;
    let mut lower: Option<Scalar> = None;
    let mut unknown: Option<CertificateError> = None;
    // The smallest feasible b never increases with a.
    let mut b_ceiling: Option<Scalar> = None;

    for a in &candidates {
        if let Some((s, ..)) = &best {
            if a >= s {
                break;
            }
        }
        let mut bs: Vec<Scalar> = candidates.clone();
        bs.extend(diffs.iter().filter(|t| *t >= a).map(|t| t - a));
        bs.sort();
        bs.dedup();
        bs.retain(|b| {
            let below_best = best.as_ref().is_none_or(|(s, ..)| &(a + b) < s);
            let below_ceiling = b_ceiling.as_ref().is_none_or(|c| b <= c);
            below_best && below_ceiling
        });
        if bs.is_empty() {
            continue;
        }

        // Binary search for the first feasible b; an inconclusive probe
        // switches to a linear scan that records bounds.
        let mut lo = 0usize;
        let mut hi = bs.len();
        let mut found: Option<(usize, Certificate)> = None;
        let mut inconclusive = false;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match search.probe(a, &bs[mid])? {
                Probe::Feasible(c) => {
                    found = Some((mid, c));
                    hi = mid;
                }
                Probe::Infeasible => lo = mid + 1,
                Probe::Unknown(e) => {
                    unknown = Some(e);
                    inconclusive = true;
                    break;
                }
            }
        }
        if inconclusive {
            found = None;
            let mut first_open: Option<&Scalar> = None;
            for b in &bs {
                match search.probe(a, b)? {
                    Probe::Feasible(c) => {
                        first_open.get_or_insert(b);
                        found = Some((bs.iter().position(|x| x == b).unwrap(), c));
                        break;
                    }
                    Probe::Infeasible => {}
                    Probe::Unknown(e) => {
                        unknown = Some(e);
                        first_open.get_or_insert(b);
                    }
                }
            }
            if let Some(b) = first_open {
                let total = a + b;
                if lower.as_ref().is_none_or(|l| &total < l) {
                    lower = Some(total);
                }
            }
        }
        if let Some((idx, cert)) = found {
            let b = bs[idx].clone();
            b_ceiling = Some(b.clone());
            best = Some((a + &b, a.clone(), b, cert));
        }
    }

    if let Some(err) = unknown {
        let (upper, cert) = match best {
            Some((s, a, b, c)) => (Extended::Finite(s), Some((a, b, c))),
            None => match matching_certificate(kind, f, g) {
                Some(c) => (Extended::Finite(&c.a + &c.b), Some((c.a.clone(), c.b.clone(), c))),
                None => (Extended::Infinite, None),
            },
        };
        let lower = match lower {
            Some(l) if Extended::Finite(l.clone()) < upper => Extended::Finite(l),
            _ => upper.clone(),
        };
        if lower == upper {
            // Every inconclusive probe lay above the proven optimum.
            if let Some((a, b, c)) = cert {
                return Ok(exact_result(kind, a, b, c));
            }
        }
        return Err(DistanceError::SizeExceeded { lower, upper, source: err });
    }

    match best {
        Some((_, a, b, cert)) => Ok(exact_result(kind, a, b, cert)),
        None => {
            // Equal infinite counts always admit the matching certificate.
            let c = matching_certificate(kind, f, g).expect("equal infinite counts");
            Ok(exact_result(kind, c.a.clone(), c.b.clone(), c))
        }
    }
}

fn exact_result(kind: RelationKind, a: Scalar, b: Scalar, cert: Certificate) -> DistanceResult {
    let value = Extended::Finite(&a + &b);
    DistanceResult {
        kind,
        value: value.clone(),
        attained: true,
        optimal_pair: Some((a, b)),
        certificate: Some(cert),
        exact: true,
        lower: value.clone(),
        upper: value,
    }
}

/// Bracketed variant of [`distance`]: on `SizeExceeded` the bounds are
/// returned in a result flagged inexact instead of as an error.
pub fn distance_or_bracket(kind: RelationKind, f: &Barcode, g: &Barcode) -> Result<DistanceResult, CertificateError> {
    match distance(kind, f, g) {
        Ok(r) => Ok(r),
        Err(DistanceError::SizeExceeded { lower, upper, .. }) => Ok(DistanceResult {
            kind,
            value: upper.clone(),
            attained: false,
            optimal_pair: None,
            certificate: None,
            exact: false,
            lower,
            upper,
        }),
        Err(DistanceError::Certificate(e)) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub d_int: Extended,
    pub d_wisom: Extended,
    pub d_isom: Extended,
    pub twice_d_wisom: Extended,
    pub int_le_wisom: bool,
    pub wisom_le_isom: bool,
    pub isom_le_twice_wisom: bool,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.int_le_wisom && self.wisom_le_isom && self.isom_le_twice_wisom
    }
}

/// `d_int <= d_w-isom <= d_isom <= 2 d_w-isom`, all computed exactly.
pub fn verify_inequality_chain(f: &Barcode, g: &Barcode) -> Result<ChainReport, DistanceError> {
    let d_int = distance(RelationKind::Interleaved, f, g)?.value;
    let d_wisom = distance(RelationKind::WeakIsom, f, g)?.value;
    let d_isom = distance(RelationKind::Isom, f, g)?.value;
    let twice_d_wisom = d_wisom.double();
    Ok(ChainReport {
        int_le_wisom: d_int <= d_wisom,
        wisom_le_isom: d_wisom <= d_isom,
        isom_le_twice_wisom: d_isom <= twice_d_wisom,
        d_int,
        d_wisom,
        d_isom,
        twice_d_wisom,
    })
}

/// A shift beyond which `hom_pattern(F, G, c)` no longer changes.
pub fn stable_shift(f: &Barcode, g: &Barcode) -> Scalar {
    let top = hom_breakpoints(f, g).into_iter().max().unwrap_or_else(Scalar::zero);
    let top = if top.is_negative() { Scalar::zero() } else { top };
    top + Scalar::one()
}

/// Dimension of `Hom(F, T_c G)` for `c` past every critical value, i.e. of
/// Hom in the quotient by torsion objects.
pub fn torsion_quotient_hom_dim(f: &Barcode, g: &Barcode) -> usize {
    hom_pattern(f, g, &stable_shift(f, g)).dimension()
}

/// Whether `F` has finite distance to the zero object, with that distance.
pub fn is_torsion(f: &Barcode) -> Result<(bool, Extended), DistanceError> {
    let d = distance(RelationKind::Isom, f, &Barcode::empty())?;
    Ok((d.value.is_finite(), d.value))
}
