use proptest::prelude::*;

use super::*;
use crate::testing::{arb_barcode, bc, int, q};

/// Enumerates every F₂ assignment in lexicographic order and returns the
/// first one passing `verify_certificate`.
fn brute_force(kind: RelationKind, f: &Barcode, g: &Barcode, a: &Scalar, b: &Scalar) -> Option<Certificate> {
    let masks = match kind {
        RelationKind::Isom => vec![hom_pattern(f, g, a), hom_pattern(g, f, b)],
        _ => vec![
            hom_pattern(f, g, a),
            hom_pattern(g, f, b),
            hom_pattern(g, f, b),
            hom_pattern(f, g, a),
        ],
    };
    // α and γ are enumerated column by column, β and δ row by row.
    let positions: Vec<Vec<(usize, usize)>> = masks
        .iter()
        .enumerate()
        .map(|(idx, m)| {
            let mut pos: Vec<_> = m.positions().collect();
            if idx % 2 == 0 {
                pos.sort_by_key(|&(r, c)| (c, r));
            }
            pos
        })
        .collect();
    let n: usize = positions.iter().map(Vec::len).sum();
    assert!(n <= 18, "oracle limited to small systems");
    for bits in 0u32..1 << n {
        let mut k = 0;
        let mut ms = Vec::new();
        for (idx, pos) in positions.iter().enumerate() {
            let chosen: Vec<_> = pos
                .iter()
                .filter(|_| {
                    let on = bits >> (n - 1 - k) & 1 == 1;
                    k += 1;
                    on
                })
                .copied()
                .collect();
            let (src, dst, s) = if idx % 3 == 0 { (f, g, a) } else { (g, f, b) };
            ms.push(Morphism::from_generators(src, dst, s, &chosen).unwrap());
        }
        let mut it = ms.into_iter();
        let cert = Certificate {
            kind,
            a: a.clone(),
            b: b.clone(),
            alpha: it.next().unwrap(),
            beta: it.next().unwrap(),
            gamma: it.next(),
            delta: it.next(),
        };
        if verify_certificate(f, g, &cert).unwrap() {
            return Some(cert);
        }
    }
    None
}

fn unknown_count(kind: RelationKind, f: &Barcode, g: &Barcode, a: &Scalar, b: &Scalar) -> usize {
    let n = hom_pattern(f, g, a).dimension() + hom_pattern(g, f, b).dimension();
    if kind == RelationKind::Isom {
        n
    } else {
        2 * n
    }
}

#[test]
fn identity_certificate_for_equal_objects() {
    let f = bc(&[(0, Some(2)), (1, None)]);
    let id = Morphism::identity(&f);
    let cert = Certificate::isom(int(0), int(0), id.clone(), id);
    for kind in RelationKind::ALL {
        assert!(verify_certificate(&f, &f, &cert.weakened(kind)).unwrap());
    }
}

#[test]
fn shifted_infinite_bars() {
    let f = bc(&[(0, None)]);
    let g = bc(&[(1, None)]);
    let alpha = Morphism::from_generators(&f, &g, &int(0), &[(0, 0)]).unwrap();
    let beta = Morphism::from_generators(&g, &f, &int(1), &[(0, 0)]).unwrap();
    let cert = Certificate::isom(int(0), int(1), alpha, beta);
    assert!(verify_certificate(&f, &g, &cert).unwrap());

    // G -> T_{1/2} F has no nonzero map, so nothing can compose to τ.
    assert_eq!(hom_pattern(&g, &f, &q(1, 2)).dimension(), 0);
    let alpha = Morphism::from_generators(&f, &g, &int(0), &[(0, 0)]).unwrap();
    let beta = Morphism::zero(&g, &f, &q(1, 2)).unwrap();
    let cert = Certificate::isom(int(0), q(1, 2), alpha, beta);
    assert!(!verify_certificate(&f, &g, &cert).unwrap());
    assert_eq!(find_certificate(RelationKind::Isom, &f, &g, &int(0), &q(1, 2)).unwrap(), None);
}

#[test]
fn malformed_matrices_are_rejected() {
    let f = bc(&[(0, Some(1))]);
    let g = bc(&[(2, Some(3))]);
    // Build a legal morphism for a different shift, then claim shift 0.
    let alpha = Morphism::from_generators(&f, &g, &int(-2), &[(0, 0)]).unwrap();
    let forged = Morphism::from_entries(&f, &g, &int(-2), alpha.entries()).unwrap();
    let cert = Certificate::isom(int(0), int(0), forged, Morphism::zero(&g, &f, &int(0)).unwrap());
    // Wrong codomain is simply not a certificate for (F, G) at (0, 0).
    assert!(!verify_certificate(&f, &g, &cert).unwrap());
    let bad = Certificate::isom(int(-1), int(0), cert.alpha.clone(), cert.beta.clone());
    assert!(matches!(verify_certificate(&f, &g, &bad), Err(CertificateError::NegativeShift { .. })));
    let mut missing = cert.weakened(RelationKind::Interleaved);
    missing.gamma = None;
    assert!(matches!(verify_certificate(&f, &g, &missing), Err(CertificateError::Malformed(_))));
}

#[test]
fn identity_is_found_first() {
    let f = bc(&[(0, None)]);
    let cert = find_certificate(RelationKind::Isom, &f, &f, &int(0), &int(0)).unwrap().unwrap();
    assert_eq!(cert.alpha, Morphism::identity(&f));
    assert_eq!(cert.beta, Morphism::identity(&f));
}

#[test]
fn finite_bar_against_zero_object() {
    let f = bc(&[(0, Some(3))]);
    let empty = Barcode::empty();
    for (a, b) in [(0, 0), (1, 1), (0, 2), (1, 2), (3, 0), (2, 2), (0, 3)] {
        let found = find_certificate(RelationKind::Isom, &f, &empty, &int(a), &int(b)).unwrap();
        assert_eq!(found.is_some(), a + b >= 3, "(a, b) = ({a}, {b})");
        if let Some(cert) = found {
            assert!(cert.alpha.is_zero() && cert.beta.is_zero());
        }
    }
}

#[test]
fn interleaving_of_shifted_rays() {
    let f = bc(&[(0, None)]);
    let g = bc(&[(2, None)]);
    let kind = RelationKind::Interleaved;
    assert!(find_certificate(kind, &f, &g, &int(0), &int(2)).unwrap().is_some());
    assert!(find_certificate(kind, &f, &g, &int(0), &q(3, 2)).unwrap().is_none());
    assert!(find_certificate(kind, &f, &g, &int(1), &int(1)).unwrap().is_none());
    assert_eq!(
        find_certificate(kind, &f, &g, &int(0), &int(2)).unwrap().is_some(),
        brute_force(kind, &f, &g, &int(0), &int(2)).is_some()
    );
}

#[test]
fn unsupported_field_is_reported() {
    let f = bc(&[(0, None)]).with_field(Field::prime(3).unwrap());
    assert_eq!(
        find_certificate(RelationKind::Isom, &f, &f, &int(0), &int(0)),
        Err(CertificateError::UnsupportedField(3))
    );
}

#[test]
fn verification_works_over_odd_characteristic() {
    let f3 = Field::prime(3).unwrap();
    let f = bc(&[(0, None)]).with_field(f3);
    let g = bc(&[(1, None)]).with_field(f3);
    let alpha = Morphism::from_entries(&f, &g, &int(0), &[2]).unwrap();
    let beta = Morphism::from_entries(&g, &f, &int(1), &[2]).unwrap();
    assert!(verify_certificate(&f, &g, &Certificate::isom(int(0), int(1), alpha.clone(), beta)).unwrap());
    let beta = Morphism::from_entries(&g, &f, &int(1), &[1]).unwrap();
    assert!(!verify_certificate(&f, &g, &Certificate::isom(int(0), int(1), alpha, beta)).unwrap());
}

#[test]
fn rigidity_examples() {
    let report = is_translation_rigid(&bc(&[(0, None)]));
    assert!(report.is_rigid);
    assert_eq!(
        report.hom_profile,
        vec![
            HomRegion { from: None, to: Some(int(0)), dimension: 0 },
            HomRegion { from: Some(int(0)), to: None, dimension: 1 },
        ]
    );
    let report = is_translation_rigid(&bc(&[(0, None), (0, Some(1))]));
    assert!(!report.is_rigid);
    let at_zero = report.hom_profile.iter().find(|r| r.from == Some(int(0))).unwrap();
    assert!(at_zero.dimension >= 2);
    assert!(!is_translation_rigid(&Barcode::empty()).is_rigid);
    assert!(!is_translation_rigid(&bc(&[(0, None), (5, None)])).is_rigid);
    assert!(!is_translation_rigid(&bc(&[(0, Some(4))])).is_rigid);
}

#[test]
fn promotion_examples() {
    let f = bc(&[(0, None)]);
    for (g, a, b) in [(bc(&[(1, None)]), 0, 1), (bc(&[(0, None)]), 0, 0), (bc(&[(2, None)]), 1, 2)] {
        let weak = find_certificate(RelationKind::WeakIsom, &f, &g, &int(a), &int(b))
            .unwrap()
            .expect("weak certificate exists");
        let strong = promote_weak_to_isom(&f, &g, &weak).unwrap();
        assert_eq!(strong.kind, RelationKind::Isom);
        assert_eq!((strong.a.clone(), strong.b.clone()), (int(a), int(b)));
        assert!(verify_certificate(&f, &g, &strong).unwrap());
        assert!(brute_force(RelationKind::Isom, &f, &g, &int(a), &int(b)).is_some());
    }
}

#[test]
fn later_ray_cannot_map_back_early() {
    // G = [2, inf) maps to T_b [0, inf) only once b >= 2, whatever a is.
    let f = bc(&[(0, None)]);
    let g = bc(&[(2, None)]);
    for kind in RelationKind::ALL {
        assert!(find_certificate(kind, &f, &g, &int(1), &int(1)).unwrap().is_none());
        assert!(brute_force(kind, &f, &g, &int(1), &int(1)).is_none());
        assert!(find_certificate(kind, &f, &g, &int(0), &int(2)).unwrap().is_some());
    }
}

#[test]
fn promotion_requires_rigidity() {
    let f = bc(&[(0, Some(1))]);
    let weak = find_certificate(RelationKind::WeakIsom, &f, &f, &int(0), &int(0)).unwrap().unwrap();
    assert_eq!(promote_weak_to_isom(&f, &f, &weak), Err(CertificateError::RigidityViolated("F")));
}

#[test]
fn cap_applies_to_coupled_unknowns() {
    let f = bc(&[(0, None), (0, None), (0, None)]);
    let err = find_certificate_capped(RelationKind::Isom, &f, &f, &int(0), &int(0), 1).unwrap_err();
    assert!(matches!(err, CertificateError::SizeExceeded { cap: 1, unknowns: 18 }));
    assert!(find_certificate(RelationKind::Isom, &f, &f, &int(0), &int(0)).unwrap().is_some());
}

fn arb_shift() -> impl Strategy<Value = Scalar> {
    (0i64..7).prop_map(|n| q(n, 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_matches_brute_force(
        f in arb_barcode(2, 6),
        g in arb_barcode(2, 6),
        a in arb_shift(),
        b in arb_shift(),
        k in 0usize..3,
    ) {
        let kind = RelationKind::ALL[k];
        prop_assume!(unknown_count(kind, &f, &g, &a, &b) <= 14);
        let found = find_certificate(kind, &f, &g, &a, &b).unwrap();
        let expected = brute_force(kind, &f, &g, &a, &b);
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn certificates_verify_and_weaken(
        f in arb_barcode(4, 8),
        g in arb_barcode(4, 8),
        a in arb_shift(),
        b in arb_shift(),
        k in 0usize..3,
    ) {
        let kind = RelationKind::ALL[k];
        if let Some(cert) = find_certificate(kind, &f, &g, &a, &b).unwrap() {
            prop_assert!(verify_certificate(&f, &g, &cert).unwrap());
            for weaker in RelationKind::ALL.into_iter().filter(|w| *w < kind) {
                prop_assert!(verify_certificate(&f, &g, &cert.weakened(weaker)).unwrap());
            }
            let (a2, b2) = (&a + &q(1, 2), &b + &q(1, 2));
            prop_assert!(find_certificate(kind, &f, &g, &a2, &b).unwrap().is_some());
            prop_assert!(find_certificate(kind, &f, &g, &a, &b2).unwrap().is_some());
        }
        let forward = find_certificate(kind, &f, &g, &a, &b).unwrap().is_some();
        let backward = find_certificate(kind, &g, &f, &b, &a).unwrap().is_some();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn promotion_never_fails_on_rigid_pairs(s in 0i64..8, t in 0i64..8, a in arb_shift(), b in arb_shift()) {
        let f = Barcode::new(vec![crate::barcode::Interval::infinite(q(s, 2))]);
        let g = Barcode::new(vec![crate::barcode::Interval::infinite(q(t, 2))]);
        if let Some(weak) = find_certificate(RelationKind::WeakIsom, &f, &g, &a, &b).unwrap() {
            let strong = promote_weak_to_isom(&f, &g, &weak);
            prop_assert!(strong.is_ok(), "{:?}", strong);
        }
    }
}
