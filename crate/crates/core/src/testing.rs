//! Shared generators for unit tests.

use proptest::prelude::*;

use crate::barcode::{Barcode, Interval};
use crate::scalar::{Extended, Scalar};

/// A bar with endpoints in `{0, 1/2, ..., top/2}`, or an infinite bar.
pub fn arb_interval(top: i64) -> impl Strategy<Value = Interval> {
    (0..top, 1..=top, prop::bool::weighted(0.3)).prop_map(move |(b, len, inf)| {
        let birth = Scalar::ratio(b, 2);
        if inf {
            Interval::infinite(birth)
        } else {
            let death = Scalar::ratio((b + len).min(top + len), 2);
            Interval::new(birth, Extended::Finite(death)).expect("positive length")
        }
    })
}

pub fn arb_barcode(max_bars: usize, top: i64) -> impl Strategy<Value = Barcode> {
    prop::collection::vec(arb_interval(top), 0..=max_bars).prop_map(Barcode::new)
}

pub fn bc(pairs: &[(i64, Option<i64>)]) -> Barcode {
    let pairs: Vec<_> = pairs
        .iter()
        .map(|(b, d)| (Scalar::from_int(*b), d.map(Scalar::from_int)))
        .collect();
    Barcode::from_pairs(&pairs).expect("valid bars")
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}
