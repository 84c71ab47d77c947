//! Objects and morphisms of the Tamarkin category of a point.
//!
//! An object is a finite direct sum of interval sheaves `k_[a, b)` on the
//! time line, stored as a [`Barcode`]. Translation `T_c` shifts every bar by
//! `c`. Between two interval sheaves the Hom space is at most one
//! dimensional:
//!
//! ```text
//! dim Hom(k_[a,b), k_[c,d)) = 1   iff   a <= c,  b <= d,  c < b
//! ```
//!
//! (with `+inf` endpoints compared by the same inequalities). Every allowed
//! position carries the "identity on the overlap" generator, so a morphism
//! between barcodes is a matrix over the coefficient field whose support is
//! confined to the allowed positions, and composition is the matrix product
//! masked by the Hom rule between the outer bars.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid interval: birth {birth} must be finite and below death {death}")]
    InvalidInterval { birth: Scalar, death: Extended },
    #[error("{0} is not a prime field characteristic")]
    InvalidField(u32),
    #[error("canonical morphism needs c <= d, got c = {c}, d = {d}")]
    InvalidShift { c: Scalar, d: Scalar },
    #[error("morphisms cannot be composed: {0}")]
    Incompatible(String),
    #[error("coefficient fields differ (F_{0} vs F_{1})")]
    FieldMismatch(u32, u32),
    #[error("nonzero entry at disallowed position ({row}, {col})")]
    DisallowedEntry { row: usize, col: usize },
    #[error("entry matrix has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
}

/// Prime field `F_p` of coefficients. `F_2` unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Field(u32);

impl Field {
    pub const F2: Field = Field(2);

    pub fn prime(p: u32) -> Result<Self, ModelError> {
        let is_prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
        if is_prime {
            Ok(Field(p))
        } else {
            Err(ModelError::InvalidField(p))
        }
    }

    pub fn characteristic(self) -> u32 {
        self.0
    }

    fn reduce(self, v: u64) -> u32 {
        (v % self.0 as u64) as u32
    }
}

impl Default for Field {
    fn default() -> Self {
        Field::F2
    }
}

/// A half-open bar `[birth, death)`, modelling the sheaf `k_[birth, death)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    birth: Scalar,
    death: Extended,
}

impl Interval {
    pub fn new(birth: Scalar, death: Extended) -> Result<Self, ModelError> {
        if death <= Extended::Finite(birth.clone()) {
            return Err(ModelError::InvalidInterval { birth, death });
        }
        Ok(Interval { birth, death })
    }

    pub fn finite(birth: Scalar, death: Scalar) -> Result<Self, ModelError> {
        Interval::new(birth, Extended::Finite(death))
    }

    pub fn infinite(birth: Scalar) -> Self {
        Interval {
            birth,
            death: Extended::Infinite,
        }
    }

    pub fn birth(&self) -> &Scalar {
        &self.birth
    }

    pub fn death(&self) -> &Extended {
        &self.death
    }

    pub fn is_infinite(&self) -> bool {
        !self.death.is_finite()
    }

    pub fn length(&self) -> Extended {
        match &self.death {
            Extended::Finite(d) => Extended::Finite(d - &self.birth),
            Extended::Infinite => Extended::Infinite,
        }
    }

    pub fn shifted(&self, c: &Scalar) -> Interval {
        Interval {
            birth: &self.birth + c,
            death: self.death.shifted(c),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.birth, self.death)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Whether a generator `src -> T_shift dst` exists.
pub fn hom_allowed(src: &Interval, dst: &Interval, shift: &Scalar) -> bool {
    let dst_birth = &dst.birth + shift;
    if src.birth > dst_birth {
        return false;
    }
    let dst_death = dst.death.shifted(shift);
    if src.death > dst_death {
        return false;
    }
    Extended::Finite(dst_birth) < src.death
}

/// A finite barcode; bars are kept sorted by `(birth, death)`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Barcode {
    bars: Vec<Interval>,
    field: Field,
}

impl Barcode {
    pub fn new(mut bars: Vec<Interval>) -> Self {
        bars.sort();
        Barcode {
            bars,
            field: Field::F2,
        }
    }

    pub fn empty() -> Self {
        Barcode::default()
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    /// Convenience constructor from `(birth, death)` pairs; `None` is `+inf`.
    pub fn from_pairs(pairs: &[(Scalar, Option<Scalar>)]) -> Result<Self, ModelError> {
        let bars = pairs
            .iter()
            .map(|(b, d)| match d {
                Some(d) => Interval::finite(b.clone(), d.clone()),
                None => Ok(Interval::infinite(b.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Barcode::new(bars))
    }

    pub fn bars(&self) -> &[Interval] {
        &self.bars
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.bars.iter().filter(|b| b.is_infinite()).count()
    }

    /// Finite endpoints (births and finite deaths), sorted and deduplicated.
    pub fn finite_endpoints(&self) -> Vec<Scalar> {
        let mut out: Vec<Scalar> = self
            .bars
            .iter()
            .flat_map(|b| std::iter::once(b.birth.clone()).chain(b.death.finite().cloned()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// `T_c F`: every bar shifted by `c`.
    pub fn translate(&self, c: &Scalar) -> Barcode {
        Barcode {
            bars: self.bars.iter().map(|b| b.shifted(c)).collect(),
            field: self.field,
        }
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, bar) in self.bars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{bar}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn translate(barcode: &Barcode, c: &Scalar) -> Barcode {
    barcode.translate(c)
}

/// Allowed positions of `Hom(source, T_shift target)`, rows indexed by
/// target bars and columns by source bars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl HomMask {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn allowed(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn dimension(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Allowed `(row, col)` positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| (k / cols, k % cols))
    }
}

pub fn hom_pattern(source: &Barcode, target: &Barcode, shift: &Scalar) -> HomMask {
    let rows = target.len();
    let cols = source.len();
    let mut bits = Vec::with_capacity(rows * cols);
    for dst in target.bars() {
        for src in source.bars() {
            bits.push(hom_allowed(src, dst, shift));
        }
    }
    HomMask { rows, cols, bits }
}

/// A morphism `source -> T_shift target`, stored as a masked matrix over the
/// barcodes' coefficient field.
///
/// Two morphisms are equal when they share the source, the actual codomain
/// `T_shift target`, and the matrix; `target`/`shift` are bookkeeping.
#[derive(Clone)]
pub struct Morphism {
    source: Barcode,
    target: Barcode,
    shift: Scalar,
    entries: Vec<u32>,
}

impl Morphism {
    pub fn zero(source: &Barcode, target: &Barcode, shift: &Scalar) -> Result<Self, ModelError> {
        check_fields(source, target)?;
        Ok(Morphism {
            source: source.clone(),
            target: target.clone(),
            shift: shift.clone(),
            entries: vec![0; source.len() * target.len()],
        })
    }

    /// Builds a morphism from a row-major entry matrix (rows are target bars).
    /// Entries are reduced modulo the field characteristic.
    pub fn from_entries(
        source: &Barcode,
        target: &Barcode,
        shift: &Scalar,
        entries: &[u32],
    ) -> Result<Self, ModelError> {
        let mut m = Morphism::zero(source, target, shift)?;
        if entries.len() != m.entries.len() {
            return Err(ModelError::Shape {
                expected: m.entries.len(),
                found: entries.len(),
            });
        }
        let field = source.field();
        for (slot, &v) in m.entries.iter_mut().zip(entries) {
            *slot = field.reduce(v as u64);
        }
        m.check_support()?;
        Ok(m)
    }

    /// Places the generator (entry 1) at each listed `(row, col)` position.
    pub fn from_generators(
        source: &Barcode,
        target: &Barcode,
        shift: &Scalar,
        positions: &[(usize, usize)],
    ) -> Result<Self, ModelError> {
        let mut m = Morphism::zero(source, target, shift)?;
        for &(row, col) in positions {
            if row >= target.len() || col >= source.len() {
                return Err(ModelError::Shape {
                    expected: m.entries.len(),
                    found: row * source.len() + col + 1,
                });
            }
            m.entries[row * source.len() + col] = 1;
        }
        m.check_support()?;
        Ok(m)
    }

    pub fn identity(barcode: &Barcode) -> Self {
        tau_morphism(barcode, &Scalar::zero(), &Scalar::zero()).expect("0 <= 0")
    }

    pub fn source(&self) -> &Barcode {
        &self.source
    }

    pub fn target(&self) -> &Barcode {
        &self.target
    }

    pub fn shift(&self) -> &Scalar {
        &self.shift
    }

    pub fn field(&self) -> Field {
        self.source.field()
    }

    /// The object the morphism actually lands in, `T_shift target`.
    pub fn codomain(&self) -> Barcode {
        self.target.translate(&self.shift)
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn cols(&self) -> usize {
        self.source.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.cols() + col]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Nonzero `(row, col, value)` triples in row-major order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, u32)> {
        let cols = self.cols();
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(k, v)| (k / cols, k % cols, *v))
            .collect()
    }

    pub fn mask(&self) -> HomMask {
        hom_pattern(&self.source, &self.target, &self.shift)
    }

    /// Errors if some nonzero entry sits at a position the Hom rule forbids.
    pub fn check_support(&self) -> Result<(), ModelError> {
        for (row, dst) in self.target.bars().iter().enumerate() {
            for (col, src) in self.source.bars().iter().enumerate() {
                if self.entry(row, col) != 0 && !hom_allowed(src, dst, &self.shift) {
                    return Err(ModelError::DisallowedEntry { row, col });
                }
            }
        }
        Ok(())
    }

    /// `T_c f : T_c source -> T_c (T_shift target)`, same matrix.
    pub fn translated(&self, c: &Scalar) -> Morphism {
        Morphism {
            source: self.source.translate(c),
            target: self.target.translate(c),
            shift: self.shift.clone(),
            entries: self.entries.clone(),
        }
    }

    /// `self ∘ f`; see [`compose`].
    pub fn after(&self, f: &Morphism) -> Result<Morphism, ModelError> {
        compose(self, f)
    }
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.entries == other.entries
            && self.codomain() == other.codomain()
    }
}

impl Eq for Morphism {}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Morphism({} -> T_{} {}, entries {:?})",
            self.source,
            self.shift,
            self.target,
            self.nonzero_entries()
        )
    }
}

/// Serialized as the objects, the shift, and the nonzero `[row, col, value]`
/// triples.
impl Serialize for Morphism {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let entries: Vec<[usize; 3]> = self
            .nonzero_entries()
            .into_iter()
            .map(|(r, c, v)| [r, c, v as usize])
            .collect();
        let mut st = serializer.serialize_struct("Morphism", 4)?;
        st.serialize_field("source", &self.source.to_string())?;
        st.serialize_field("target", &self.target.to_string())?;
        st.serialize_field("shift", &self.shift)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

fn check_fields(a: &Barcode, b: &Barcode) -> Result<(), ModelError> {
    if a.field() != b.field() {
        return Err(ModelError::FieldMismatch(
            a.field().characteristic(),
            b.field().characteristic(),
        ));
    }
    Ok(())
}

/// The canonical morphism `τ_{c,d}(F): T_c F -> T_d F` for `c <= d`.
///
/// Diagonal, with a unit on bar `i` exactly when `d - c` is shorter than the
/// bar; bars of length at most `d - c` are killed.
pub fn tau_morphism(barcode: &Barcode, c: &Scalar, d: &Scalar) -> Result<Morphism, ModelError> {
    if c > d {
        return Err(ModelError::InvalidShift {
            c: c.clone(),
            d: d.clone(),
        });
    }
    let gap = Extended::Finite(d - c);
    let source = barcode.translate(c);
    let n = source.len();
    let mut entries = vec![0; n * n];
    for (i, bar) in source.bars().iter().enumerate() {
        if gap < bar.length() {
            entries[i * n + i] = 1;
        }
    }
    Ok(Morphism {
        target: source.clone(),
        source,
        shift: d - c,
        entries,
    })
}

/// Composite `g ∘ f`.
///
/// If `g.source` is `f.target`, `g` is implicitly translated by `f.shift`
/// (so `T_s g ∘ f` and the shifts add); otherwise `g.source` must be the
/// codomain `T_shift target` of `f`. Entries whose outer positions violate the
/// Hom rule are dropped.
pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism, ModelError> {
    check_fields(&f.source, &g.source)?;
    let (target, shift) = if g.source == f.target {
        (g.target.clone(), &f.shift + &g.shift)
    } else if g.source == f.codomain() {
        (g.target.clone(), g.shift.clone())
    } else {
        return Err(ModelError::Incompatible(format!(
            "f lands in T_{} {}, g starts at {}",
            f.shift, f.target, g.source
        )));
    };
    let field = f.field();
    let (rows, inner, cols) = (g.rows(), g.cols(), f.cols());
    let mut entries = vec![0u32; rows * cols];
    for (i, dst) in target.bars().iter().enumerate() {
        for (j, src) in f.source.bars().iter().enumerate() {
            if !hom_allowed(src, dst, &shift) {
                continue;
            }
            let mut acc = 0u64;
            for k in 0..inner {
                acc += g.entry(i, k) as u64 * f.entry(k, j) as u64;
            }
            entries[i * cols + j] = field.reduce(acc);
        }
    }
    Ok(Morphism {
        source: f.source.clone(),
        target,
        shift,
        entries,
    })
}
