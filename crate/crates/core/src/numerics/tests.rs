use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::hamexpr::{evaluate, parse, Expr, Point};

fn e(text: &str, n: usize) -> Expr {
    parse(text, n).unwrap()
}

fn pt(q: &[f64], p: &[f64]) -> PhasePoint {
    PhasePoint::new(q.to_vec(), p.to_vec()).unwrap()
}

fn cloud(rows: &[[f64; 2]]) -> SampleCloud {
    SampleCloud::new(rows.iter().map(|r| pt(&r[..1], &r[1..])).collect()).unwrap()
}

fn grid() -> TimeGrid {
    TimeGrid::default()
}

#[test]
fn vector_field_examples() {
    let (dq, dp) = hamiltonian_vector_field(&e("p1^2/2", 1), &pt(&[0.0], &[1.0]), 0.0).unwrap();
    assert_eq!((dq, dp), (vec![1.0], vec![0.0]));
    let (dq, dp) = hamiltonian_vector_field(&e("(q1^2 + p1^2)/2", 1), &pt(&[1.0], &[0.0]), 0.0).unwrap();
    assert_eq!((dq, dp), (vec![0.0], vec![-1.0]));
    assert!(hamiltonian_vector_field(&e("q1", 1), &pt(&[1.0, 2.0], &[0.0, 0.0]), 0.0).is_err());
}

#[test]
fn flow_examples() {
    let z = pt(&[0.3], &[-0.2]);
    assert_eq!(flow(&e("0", 1), &z, 0.0, 1.0, 1e-3).unwrap(), z);
    assert_eq!(flow(&e("q1*p1", 1), &z, 0.4, 0.4, 1e-3).unwrap(), z);

    let end = flow(&e("p1^2/2", 1), &pt(&[0.0], &[1.0]), 0.0, 1.0, 1e-3).unwrap();
    assert!((end.q[0] - 1.0).abs() <= 1e-9 && (end.p[0] - 1.0).abs() <= 1e-9);

    let h = e("(1 + s)*(q1^2 + p1^2)/2 + sin(3*s)*q1", 1);
    let z = pt(&[0.7], &[0.1]);
    let half = flow(&h, &z, 0.0, 0.5, 1e-3).unwrap();
    let two = flow(&h, &half, 0.5, 1.0, 1e-3).unwrap();
    let one = flow(&h, &z, 0.0, 1.0, 1e-3).unwrap();
    assert!(two.distance(&one) <= 1e-8);

    let back = flow(&h, &one, 1.0, 0.0, 1e-3).unwrap();
    assert!(back.distance(&z) <= 1e-10);
    assert!(flow(&h, &z, 0.0, 1.0, 0.0).is_err());
}

#[test]
fn energy_is_conserved_for_autonomous_hamiltonians() {
    let h = e("p1^2/2 - cos(q1) + q2^2*p2^2/4", 2);
    let ham = Hamiltonian::new(h.clone());
    let z0 = vec![0.4, -0.3, 1.1, 0.2];
    let times: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let path = integrate_through(|x, s| ham.field(x, s, 0.0), &z0, &times, 1e-3).unwrap();
    let e0 = ham.value(&z0, 0.0, 0.0).unwrap();
    for x in &path {
        assert!((ham.value(x, 0.0, 0.0).unwrap() - e0).abs() <= 1e-6);
    }
}

#[test]
fn integrator_is_fourth_order() {
    // rotation by the angle ∫ (1 + s) = s + s²/2
    let h = e("(1 + s)*(q1^2 + p1^2)/2", 1);
    let exact = |s: f64| {
        let t = s + s * s / 2.0;
        (t.cos(), -t.sin())
    };
    let err = |step: f64| {
        let z = flow(&h, &pt(&[1.0], &[0.0]), 0.0, 1.0, step).unwrap();
        let (q, p) = exact(1.0);
        ((z.q[0] - q).powi(2) + (z.p[0] - p).powi(2)).sqrt()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 >= 8.0, "{e1} {e2}");
}

#[test]
fn osc_norm_examples() {
    let box_cloud = SampleCloud::box_grid(1, 2.5, 41).unwrap();
    assert_eq!(osc_norm(&e("0", 1), &box_cloud, &grid(), true).unwrap(), 0.0);
    let h = e("sin(pi*s)*bump(q1^2 + p1^2; 4)", 1);
    let v = osc_norm(&h, &box_cloud, &grid(), false).unwrap();
    assert!((v - 2.0 / PI).abs() <= 1e-3, "{v}");

    let positive = e("(1 + s)*bump(q1^2 + p1^2; 4)*(2 + q1)", 1);
    let padded = osc_norm(&positive, &cloud(&[[0.0, 0.0], [0.5, 0.0]]), &grid(), true).unwrap();
    // max over samples is at q1 = 0.5: ∫ 2.5 (1 + s) ds
    assert!((padded - 3.75).abs() < 1e-9, "{padded}");
}

#[test]
fn restricted_oscillation_examples() {
    let single = cloud(&[[0.3, -0.1]]);
    assert_eq!(osc_norm_restricted(&e("q1*p1*s + q1^3", 1), &single, &grid()).unwrap(), 0.0);

    let inside = cloud(&[[0.0, 0.0], [0.5, 0.5], [-1.0, 0.3]]);
    let flat = e("s*bump(q1^2 + p1^2; 4)", 1);
    assert_eq!(osc_norm_restricted(&flat, &inside, &grid()).unwrap(), 0.0);

    // H = q1 g(s) on q1 = ±1 gives 2 ∫ |g|
    let two = cloud(&[[-1.0, 0.0], [1.0, 0.0]]);
    let v = osc_norm_restricted(&e("q1*cos(2*pi*s)", 1), &two, &grid()).unwrap();
    assert!((v - 4.0 / PI).abs() < 1e-5, "{v}");
    let v = osc_norm_restricted(&e("q1*(s - 1/2)", 1), &two, &grid()).unwrap();
    assert!((v - 0.5).abs() < 1e-6, "{v}");
}

#[test]
fn bound_examples() {
    let a = cloud(&[[0.2, 0.1], [-0.4, 0.3]]);
    let zero = ScalarPath::zero();
    assert_eq!(bound_b(&e("0", 1), &zero, &a, &grid(), 1e-3).unwrap(), 0.0);

    let point = SampleCloud::point_model();
    let b = bound_b(&e("s", 0), &zero, &point, &grid(), 1e-3).unwrap();
    assert!((b - 0.5).abs() <= 1e-6);
    let f = ScalarPath::new(e("1/2", 0)).unwrap();
    let b = bound_b(&e("s", 0), &f, &point, &grid(), 1e-3).unwrap();
    assert!((b - 0.25).abs() <= 1e-6);
    // ∫|h - f| >= |∫(h - f)|
    assert!(b + 1e-12 >= (0.5 - f.integral()).abs());
}

#[test]
fn bound_with_f_between_envelopes_is_the_advected_oscillation() {
    let h = e("(q1^2 + p1^2)*(1 + s)/2 + q1*s", 1);
    let a = cloud(&[[0.5, 0.0], [-0.3, 0.6], [1.0, 1.0]]);
    let ext = advected_extrema(&h, &a, &grid(), 1e-3).unwrap();
    let direct: Vec<f64> = ext.max.iter().zip(&ext.min).map(|(x, y)| x - y).collect();
    let direct = grid().integrate(&direct);
    // the midpoint path of the envelopes is a smooth function of s here;
    // any f squeezed between them works, take a constant inside all bands
    let lo = ext.max.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ext.min.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi < lo);
    let f = ScalarPath::new(e(&format!("{}", (lo + hi) / 2.0), 0)).unwrap();
    let b = bound_b(&h, &f, &a, &grid(), 1e-3).unwrap();
    assert!((b - direct).abs() < 1e-12, "{b} vs {direct}");
}

#[test]
fn bound_with_zero_f_matches_the_remark_form() {
    let h = e("(q1 - 1)*p1*cos(pi*s) + s*q1^2", 1);
    let a = cloud(&[[0.5, 0.0], [-0.3, 0.6], [1.0, -1.0]]);
    let b = bound_b(&h, &ScalarPath::zero(), &a, &grid(), 1e-3).unwrap();
    let ext = advected_extrema(&h, &a, &grid(), 1e-3).unwrap();
    let vals: Vec<f64> = ext
        .max
        .iter()
        .zip(&ext.min)
        .map(|(x, y)| x.max(0.0) - y.min(0.0))
        .collect();
    assert!((b - grid().integrate(&vals)).abs() < 1e-12);
}

#[test]
fn enlarging_the_cloud_never_decreases_bounds() {
    let h = e("q1*p1*sin(2*pi*s) + p1^2/4", 1);
    let small = cloud(&[[0.5, 0.0], [-0.3, 0.6]]);
    let large = cloud(&[[0.5, 0.0], [-0.3, 0.6], [1.0, -0.2], [0.0, 1.2]]);
    let f = ScalarPath::new(e("s/3", 0)).unwrap();
    let g = TimeGrid::trapezoid(201).unwrap();
    assert!(osc_norm_restricted(&h, &large, &g).unwrap() >= osc_norm_restricted(&h, &small, &g).unwrap());
    assert!(bound_b(&h, &f, &large, &g, 1e-3).unwrap() >= bound_b(&h, &f, &small, &g, 1e-3).unwrap());
}

#[test]
fn quadrature_rules() {
    let trap = TimeGrid::trapezoid(11).unwrap();
    let lin: Vec<f64> = trap.times().iter().map(|s| 3.0 * s + 1.0).collect();
    assert!((trap.integrate(&lin) - 2.5).abs() < 1e-15);
    let simp = TimeGrid::simpson(11).unwrap();
    let cubic: Vec<f64> = simp.times().iter().map(|s| s * s * s).collect();
    assert!((simp.integrate(&cubic) - 0.25).abs() < 1e-15);
    assert!(TimeGrid::simpson(10).is_err());
    assert!(TimeGrid::trapezoid(1).is_err());
    assert_eq!(TimeGrid::trapezoid(11).unwrap().refined().nodes(), 21);
}

#[test]
fn scalar_paths() {
    let f = ScalarPath::new(e("s^2", 0)).unwrap();
    assert!((f.integral() - 1.0 / 3.0).abs() < 1e-12);
    assert!(ScalarPath::new(e("q1*s", 1)).is_err());
    assert!(ScalarPath::new(e("sp", 0)).is_err());
}

#[test]
fn clouds_validate_their_points() {
    assert_eq!(SampleCloud::new(vec![]), Err(NumericsError::EmptyCloud));
    assert!(SampleCloud::new(vec![pt(&[0.0], &[0.0]), pt(&[0.0, 1.0], &[0.0, 0.0])]).is_err());
    assert!(PhasePoint::new(vec![f64::NAN], vec![0.0]).is_err());
    assert_eq!(SampleCloud::box_grid(1, 1.0, 3).unwrap().len(), 9);
}

#[test]
fn flow_blow_up_is_reported() {
    let h = e("q1^4*p1", 1);
    let err = flow(&h, &pt(&[3.0], &[0.0]), 0.0, 1.0, 1e-3).unwrap_err();
    assert!(matches!(err, NumericsError::NonFinite { .. } | NumericsError::Expr(_)), "{err}");
}

fn one_dof_catalog() -> Vec<Expr> {
    [
        "(q1^2 + p1^2)/2*bump(q1^2 + p1^2; 9)",
        "sin(2*pi*s)*q1*bump(q1^2 + p1^2; 9)",
        "(s*p1^2 - q1^3/3)*bump(q1^2 + p1^2; 16)",
    ]
    .iter()
    .map(|t| e(t, 1))
    .collect()
}

fn small_cloud() -> SampleCloud {
    cloud(&[[0.0, 0.0], [0.5, -0.2], [-0.4, 0.7], [0.9, 0.3]])
}

#[test]
fn interpolating_family_in_the_point_model() {
    let h = e("sin(2*pi*s) + s", 0);
    let f = ScalarPath::new(e("s^2", 0)).unwrap();
    let fam = build_interpolating_family(&h, &f, &SampleCloud::point_model(), 0.05, 10.0, &FamilyOptions::default())
        .unwrap();
    let g = TimeGrid::default();
    for &s in &[0.0, 0.13, 0.5, 0.77, 1.0] {
        let hs = evaluate(&h, &Point::new(&[], &[], s, 0.0)).unwrap();
        assert!((fam.value(&[], s, 1.0).unwrap() - hs).abs() < 1e-12);
        let (_, _, ft) = fam.envelopes(s).unwrap();
        assert!((fam.value(&[], s, 0.0).unwrap() - (hs - ft)).abs() < 1e-12);
        assert!((ft - s * s).abs() <= 0.05 / 4.0);
    }
    let meta = fam.metadata().unwrap();
    let shift1 = fam.point_shift(1.0, &g).unwrap();
    let shift0 = fam.point_shift(0.0, &g).unwrap();
    assert!((shift0 - (shift1 - meta.ftilde_integral)).abs() < 1e-9);

    let osc0 = fam.osc_norm(0.0, &SampleCloud::point_model(), &g, true).unwrap();
    let b = bound_b(&h, &f, &SampleCloud::point_model(), &g, 1e-3).unwrap();
    assert!(osc0 <= b + 4.0 * 0.05);
}

#[test]
fn interpolating_family_bounds_and_independence() {
    let a = small_cloud();
    let f = ScalarPath::new(e("s/2 - 1/4", 0)).unwrap();
    let eps = 0.02;
    let g = TimeGrid::trapezoid(501).unwrap();
    let opts = FamilyOptions {
        grid: g,
        step: 2e-3,
        support_radius: Some(4.0),
    };
    let probe = SampleCloud::box_grid(1, 4.5, 31).unwrap();
    for h in one_dof_catalog() {
        let fam = build_interpolating_family(&h, &f, &a, eps, 20.0, &opts).unwrap();
        let b = bound_b(&h, &f, &a, &g, 2e-3).unwrap();
        let osc0 = fam.osc_norm(0.0, &probe, &g, true).unwrap();
        assert!(osc0 <= b + 4.0 * eps, "{h}: {osc0} > {b} + 4ε");

        let report =
            check_sprime_independence(&fam, &a, &TimeGrid::trapezoid(101).unwrap(), &[(0.0, 1.0), (0.3, 0.8)], 2e-3, 1e-4)
                .unwrap();
        assert!(report.passed, "{h}: {report:?}");
    }
}

#[test]
fn zero_f_family_is_the_clamped_hamiltonian() {
    let h = e("(q1^2 + p1^2)/2*bump(q1^2 + p1^2; 9)", 1);
    let a = small_cloud();
    let opts = FamilyOptions {
        grid: TimeGrid::trapezoid(201).unwrap(),
        step: 5e-3,
        support_radius: Some(3.0),
    };
    let fam = build_interpolating_family(&h, &ScalarPath::zero(), &a, 1e-3, 10.0, &opts).unwrap();
    let ham = Hamiltonian::new(h);
    for z in SampleCloud::box_grid(1, 2.0, 9).unwrap().points() {
        for &s in &[0.0, 0.3, 0.9] {
            let (m, big_m, ft) = fam.envelopes(s).unwrap();
            assert_eq!(ft, 0.0);
            let rho = smooth_clamp(m, big_m, 0.5e-3).unwrap();
            let direct = rho.apply(ham.value(&z.state(), s, 0.0).unwrap());
            assert!((fam.value(&z.state(), s, 0.0).unwrap() - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn family_construction_rejects_small_range() {
    let h = e("q1*bump(q1^2 + p1^2; 9)", 1);
    let err = build_interpolating_family(&h, &ScalarPath::zero(), &small_cloud(), 0.1, 0.5, &FamilyOptions::default())
        .unwrap_err();
    assert!(matches!(err, NumericsError::InvalidParameter(_)));
    assert!(build_interpolating_family(&h, &ScalarPath::zero(), &small_cloud(), 0.0, 10.0, &FamilyOptions::default())
        .is_err());
}

#[test]
fn sprime_dependent_family_fails_independence() {
    let fam = TwoParamFamily::from_expr(e("sp*q1 + p1^2/2", 1));
    let report = check_sprime_independence(
        &fam,
        &small_cloud(),
        &TimeGrid::trapezoid(51).unwrap(),
        &[(0.0, 1.0)],
        1e-2,
        1e-4,
    )
    .unwrap();
    assert!(!report.passed);
    assert!(report.max_deviation > 0.1);
}

#[test]
fn vector_field_identity_holds_for_simple_families() {
    let samples = small_cloud();
    let opts = IdentityOptions {
        times: vec![(0.5, 0.5)],
        ..IdentityOptions::default()
    };
    let fam = TwoParamFamily::from_expr(e("(q1^2 + p1^2)/2*(1 + s)", 1));
    let r = verify_vector_field_identity(&fam, &samples, &opts, 1e-3).unwrap();
    assert_eq!(r.max_residual, 0.0);
    assert!(r.passed);

    let fam = TwoParamFamily::from_expr(e("sp*(q1^2*p1 + p1^2/2)", 1));
    let r = verify_vector_field_identity(&fam, &samples, &opts, 1e-3).unwrap();
    assert!(r.passed, "{r:?}");
    assert_eq!(r.zero_control, 0.0);
    assert_eq!(r.boundary, 0.0);
}

#[test]
fn identity_residual_detects_a_wrong_bracket_sign() {
    // with the opposite bracket the residual would be 2|[X_G, V]|; make
    // sure that quantity is far from zero here so the check has teeth
    let fam = TwoParamFamily::from_expr(e("sp*q1^2*p1 + s*p1^2", 1));
    let samples = cloud(&[[0.6, 0.4]]);
    let opts = IdentityOptions {
        times: vec![(0.7, 0.4)],
        ..IdentityOptions::default()
    };
    let r = verify_vector_field_identity(&fam, &samples, &opts, 1e-3).unwrap();
    assert!(r.passed, "{r:?}");
    let w = samples.points()[0].state();
    let x = fam.field(&w, 0.7, 0.4).unwrap();
    assert!(x.iter().any(|c| c.abs() > 0.1));
}

#[test]
fn reparametrization() {
    let h = e("(q1^2 + p1^2)*(1 + s)/2 + q1*sin(3*s)", 1);
    assert_eq!(reparametrize(&h, &e("s", 1)).unwrap(), h);
    let k = reparametrize(&h, &e("s^2", 0)).unwrap();
    let z = pt(&[0.4], &[-0.9]);
    let fh = flow(&h, &z, 0.0, 1.0, 1e-3).unwrap();
    let fk = flow(&k, &z, 0.0, 1.0, 1e-3).unwrap();
    assert!(fh.distance(&fk) <= 1e-6);
    let mid_h = flow(&h, &z, 0.0, 0.25, 1e-3).unwrap();
    let mid_k = flow(&k, &z, 0.0, 0.5, 1e-3).unwrap();
    assert!(mid_h.distance(&mid_k) <= 1e-6);

    let a = cloud(&[[0.5, 0.0], [-0.3, 0.6], [1.0, 1.0]]);
    let g = TimeGrid::default();
    let oh = osc_norm_restricted(&h, &a, &g).unwrap();
    let ok = osc_norm_restricted(&k, &a, &g).unwrap();
    assert!((oh - ok).abs() <= 1e-5, "{oh} vs {ok}");

    assert!(matches!(reparametrize(&h, &e("2*s", 0)), Err(NumericsError::InvalidParameter(_))));
    assert!(matches!(reparametrize(&h, &e("4*s*(1 - s) + s", 0)), Err(NumericsError::NotMonotone(_))));
    assert!(matches!(
        reparametrize(&h, &e("s + sin(2*pi*s)", 0)),
        Err(NumericsError::NotMonotone(_))
    ));
    assert!(reparametrize(&h, &e("q1", 1)).is_err());
}

fn eval2(f: &Expr, x: &[f64; 4]) -> f64 {
    evaluate(f, &Point::new(&x[..2], &x[2..], 0.3, 0.0)).unwrap()
}

#[test]
fn canonical_bracket() {
    let b = poisson_bracket(&e("q1", 1), &e("p1", 1)).unwrap();
    assert_eq!(b.to_string(), "1");
    let b = poisson_bracket(&e("p1", 1), &e("q1", 1)).unwrap();
    assert_eq!(b.to_string(), "-1");
    assert!(poisson_bracket(&e("q1", 1), &e("q1", 2)).is_err());
}

#[test]
fn hamiltonian_field_of_bracket_is_the_field_bracket() {
    let f = e("q1^2*p2 + sin(p1)", 2);
    let g = e("p1*q2 + q1^3/3 - p2^2", 2);
    let fg = Hamiltonian::new(poisson_bracket(&f, &g).unwrap());
    let (hf, hg) = (Hamiltonian::new(f), Hamiltonian::new(g));
    let z = [0.3, -0.5, 0.8, 0.1];
    let xf = hf.field(&z, 0.0, 0.0).unwrap();
    let xg = hg.field(&z, 0.0, 0.0).unwrap();
    let h = 1e-5;
    let dir = |field: &Hamiltonian, v: &[f64]| -> Vec<f64> {
        let plus: Vec<f64> = z.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = z.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let fp = field.field(&plus, 0.0, 0.0).unwrap();
        let fm = field.field(&minus, 0.0, 0.0).unwrap();
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let dxf_xg = dir(&hf, &xg);
    let dxg_xf = dir(&hg, &xf);
    let want = fg.field(&z, 0.0, 0.0).unwrap();
    for i in 0..4 {
        assert!((dxf_xg[i] - dxg_xf[i] - want[i]).abs() < 1e-7, "{i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(x in prop::array::uniform4(-1.0f64..1.0)) {
        let catalog = [
            e("q1^2*p2 + sin(p1)", 2),
            e("p1*q2 + q1^3/3 - p2^2", 2),
            e("exp(q2/2)*cos(p1) + q1*p1", 2),
        ];
        for f in &catalog {
            let ff = poisson_bracket(f, f).unwrap();
            prop_assert!(eval2(&ff, &x).abs() <= 1e-12);
        }
        let [a, b, c] = &catalog;
        let br = |u: &Expr, v: &Expr| poisson_bracket(u, v).unwrap();
        let jac = eval2(&br(a, &br(b, c)), &x) + eval2(&br(b, &br(c, a)), &x) + eval2(&br(c, &br(a, b)), &x);
        prop_assert!(jac.abs() <= 1e-8, "{}", jac);
        let ab = eval2(&br(a, b), &x);
        let ba = eval2(&br(b, a), &x);
        prop_assert!((ab + ba).abs() <= 1e-12);
    }
}
