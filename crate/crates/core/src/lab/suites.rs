use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::barcode::{hom_pattern, Barcode, Interval};
use crate::distances::{distance, torsion_quotient_hom_dim, verify_inequality_chain};
use crate::hamexpr::parse;
use crate::numerics::{
    build_interpolating_family, check_sprime_independence, flow, osc_norm_restricted, reparametrize,
    verify_vector_field_identity, FamilyOptions, IdentityOptions, PhasePoint, SampleCloud, ScalarPath, TimeGrid,
};
use crate::relations::{promote_weak_to_isom, verify_certificate, RelationKind};
use crate::scalar::{Extended, Scalar};

use super::catalog::{compact_hamiltonians, exact_flows, point_cases, two_param_families};
use super::{
    eps_scan_distance, verify_family_shift_identity, verify_metric_support_point, PointModelQuantization, Result, ShiftIdentityOptions, StabilityOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Chain,
    Promotion,
    Grid,
    Torsion,
    Stability,
    #[serde(rename = "twoparam")]
    TwoParam,
    Reparam,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Chain,
        Suite::Promotion,
        Suite::Grid,
        Suite::Torsion,
        Suite::Stability,
        Suite::TwoParam,
        Suite::Reparam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Chain => "chain",
            Suite::Promotion => "promotion",
            Suite::Grid => "grid",
            Suite::Torsion => "torsion",
            Suite::Stability => "stability",
            Suite::TwoParam => "twoparam",
            Suite::Reparam => "reparam",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSizes {
    pub chain_pairs: usize,
    /// Bars per barcode in the random suites.
    pub max_bars: usize,
    /// Endpoints are drawn from `{0, 1/2, ..., top/2}`.
    pub top: i64,
    pub promotion_pairs: usize,
    pub grid_pairs: usize,
    pub torsion_pairs: usize,
    pub identity_samples: usize,
    /// Sup-norm tolerance of the two-parameter identity.
    pub identity_tol: f64,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            chain_pairs: 200,
            max_bars: 5,
            top: 8,
            promotion_pairs: 100,
            grid_pairs: 100,
            torsion_pairs: 100,
            identity_samples: 50,
            identity_tol: 1e-3,
        }
    }
}

/// One line of a suite's table: `left <= right` is what was checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: String,
    pub left: f64,
    pub right: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: Option<f64>,
    pub worst: Option<String>,
    pub rows: Vec<CaseRow>,
}

impl SuiteOutcome {
    fn new(suite: Suite, seed: u64) -> Self {
        SuiteOutcome {
            suite,
            seed,
            cases: 0,
            failures: 0,
            max_residual: None,
            worst: None,
            rows: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn fail(&mut self, what: String) {
        self.failures += 1;
        self.worst.get_or_insert(what);
    }

    /// Records `left <= right` as a case.
    fn row(&mut self, case: String, left: f64, right: f64) {
        let passed = left <= right;
        self.cases += 1;
        if !passed {
            self.fail(format!("{case}: {left:e} > {right:e}"));
        }
        self.rows.push(CaseRow {
            case,
            left,
            right,
            passed,
        });
    }

    fn residual(&mut self, r: f64, at: impl FnOnce() -> String) {
        if self.max_residual.is_none_or(|m| r > m) {
            self.max_residual = Some(r);
            if self.failures == 0 {
                self.worst = Some(at());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub sizes: SuiteSizes,
    pub suites: Vec<SuiteOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteOutcome::passed)
    }
}

/// Runs `suites` in parallel; each draws from its own generator seeded by
/// `seed` and the suite, so the report depends only on the arguments.
pub fn run_suites(seed: u64, sizes: &SuiteSizes, suites: &[Suite]) -> SuiteReport {
    let outcomes = suites.par_iter().map(|&s| run_suite(s, seed, sizes)).collect();
    SuiteReport {
        seed,
        sizes: sizes.clone(),
        suites: outcomes,
    }
}

pub fn run_suite(suite: Suite, seed: u64, sizes: &SuiteSizes) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(suite, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64);
    let result = match suite {
        Suite::Chain => chain(&mut out, &mut rng, sizes),
        Suite::Promotion => promotion(&mut out, &mut rng, sizes),
        Suite::Grid => grid(&mut out, &mut rng, sizes),
        Suite::Torsion => torsion(&mut out, &mut rng, sizes),
        Suite::Stability => stability(&mut out),
        Suite::TwoParam => two_param(&mut out, &mut rng, sizes),
        Suite::Reparam => reparam(&mut out),
    };
    if let Err(e) = result {
        out.fail(format!("aborted: {e}"));
    }
    out
}

fn half(rng: &mut ChaCha8Rng, top: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(0..=top), 2)
}

fn finite_bar(rng: &mut ChaCha8Rng, top: i64) -> Interval {
    let b = rng.gen_range(0..top);
    let d = rng.gen_range(b + 1..=top);
    Interval::finite(Scalar::ratio(b, 2), Scalar::ratio(d, 2)).expect("positive length")
}

fn barcode_with(rng: &mut ChaCha8Rng, infinite: usize, finite: usize, top: i64) -> Barcode {
    let mut bars: Vec<Interval> = (0..infinite).map(|_| Interval::infinite(half(rng, top))).collect();
    bars.extend((0..finite).map(|_| finite_bar(rng, top)));
    Barcode::new(bars)
}

/// Two barcodes of at most `max_bars` bars; three times in four they have
/// the same number of infinite bars, so most distances are finite.
fn random_pair(rng: &mut ChaCha8Rng, max_bars: usize, top: i64) -> (Barcode, Barcode) {
    let inf_cap = max_bars.min(2);
    let inf_f = rng.gen_range(0..=inf_cap);
    let inf_g = if rng.gen_bool(0.75) {
        inf_f
    } else {
        rng.gen_range(0..=inf_cap)
    };
    let fin_f = rng.gen_range(0..=max_bars - inf_f);
    let fin_g = rng.gen_range(0..=max_bars - inf_g);
    (barcode_with(rng, inf_f, fin_f, top), barcode_with(rng, inf_g, fin_g, top))
}

fn chain(out: &mut SuiteOutcome, rng: &mut ChaCha8Rng, sizes: &SuiteSizes) -> Result<()> {
    let pairs: Vec<_> = (0..sizes.chain_pairs)
        .map(|_| random_pair(rng, sizes.max_bars, sizes.top))
        .collect();
    let results: Vec<_> = pairs.par_iter().map(|(f, g)| verify_inequality_chain(f, g)).collect();
    for ((f, g), r) in pairs.iter().zip(results) {
        out.cases += 1;
        match r {
            Ok(report) if report.holds() => {}
            Ok(report) => out.fail(format!(
                "F = {f}, G = {g}: int {} wisom {} isom {}",
                report.d_int, report.d_wisom, report.d_isom
            )),
            Err(e) => out.fail(format!("F = {f}, G = {g}: {e}")),
        }
    }
    Ok(())
}

fn promotion(out: &mut SuiteOutcome, rng: &mut ChaCha8Rng, sizes: &SuiteSizes) -> Result<()> {
    let pairs: Vec<_> = (0..sizes.promotion_pairs)
        .map(|_| {
            let f = Barcode::new(vec![Interval::infinite(half(rng, sizes.top))]);
            let g = f.translate(&Scalar::ratio(rng.gen_range(-sizes.top..=sizes.top), 4));
            (f, g)
        })
        .collect();
    let results: Vec<Result<Option<String>>> = pairs
        .par_iter()
        .map(|(f, g)| {
            let weak = distance(RelationKind::WeakIsom, f, g)?;
            let strong = distance(RelationKind::Isom, f, g)?;
            if weak.value != strong.value {
                return Ok(Some(format!("d_w-isom {} != d_isom {}", weak.value, strong.value)));
            }
            let cert = weak.certificate.expect("finite distance has a certificate");
            let promoted = promote_weak_to_isom(f, g, &cert)?;
            if !verify_certificate(f, g, &promoted)? {
                return Ok(Some("promoted certificate does not verify".into()));
            }
            Ok(None)
        })
        .collect();
    for ((f, g), r) in pairs.iter().zip(results) {
        out.cases += 1;
        match r {
            Ok(None) => {}
            Ok(Some(why)) => out.fail(format!("F = {f}, G = {g}: {why}")),
            Err(e) => out.fail(format!("F = {f}, G = {g}: {e}")),
        }
    }
    Ok(())
}

fn grid(out: &mut SuiteOutcome, rng: &mut ChaCha8Rng, sizes: &SuiteSizes) -> Result<()> {
    let top = sizes.top.min(6);
    let pairs: Vec<_> = (0..sizes.grid_pairs).map(|_| random_pair(rng, 2, top)).collect();
    let results: Vec<Result<Vec<(RelationKind, Extended, Extended)>>> = pairs
        .par_iter()
        .map(|(f, g)| {
            RelationKind::ALL
                .iter()
                .map(|&k| Ok((k, distance(k, f, g)?.value, eps_scan_distance(k, f, g)?)))
                .collect()
        })
        .collect();
    for ((f, g), r) in pairs.iter().zip(results) {
        out.cases += 1;
        match r {
            Ok(values) => {
                if let Some((k, d, scan)) = values.iter().find(|(_, d, s)| d != s) {
                    out.fail(format!("F = {f}, G = {g}: d_{} = {d}, scan {scan}", k.name()));
                }
            }
            Err(e) => out.fail(format!("F = {f}, G = {g}: {e}")),
        }
    }
    Ok(())
}

fn torsion(out: &mut SuiteOutcome, rng: &mut ChaCha8Rng, sizes: &SuiteSizes) -> Result<()> {
    for _ in 0..sizes.torsion_pairs {
        let (f, g) = random_pair(rng, sizes.max_bars, sizes.top);
        let mut ends = f.finite_endpoints();
        ends.extend(g.finite_endpoints());
        ends.extend(f.bars().iter().chain(g.bars()).map(|b| b.birth().clone()));
        let lo = ends.iter().min().cloned().unwrap_or_else(Scalar::zero);
        let hi = ends.iter().max().cloned().unwrap_or_else(Scalar::zero);
        let beyond = &(&hi - &lo) + &Scalar::one();
        let expected = hom_pattern(&f, &g, &beyond).dimension();
        let got = torsion_quotient_hom_dim(&f, &g);
        out.cases += 1;
        if got != expected || got != f.infinite_count() * g.infinite_count() {
            out.fail(format!("F = {f}, G = {g}: {got} vs {expected}"));
        }
    }
    Ok(())
}

fn infinite_ray() -> Barcode {
    Barcode::new(vec![Interval::infinite(Scalar::zero())])
}

fn stability(out: &mut SuiteOutcome) -> Result<()> {
    let options = StabilityOptions::default();
    for case in point_cases() {
        let h = parse(case.h, 0)?;
        let f = ScalarPath::new(parse(case.f, 0)?)?;
        let r = verify_metric_support_point(&h, &f, &infinite_ray(), &options)?;
        let left = match &r.distance {
            Extended::Finite(x) => x.to_f64(),
            Extended::Infinite => f64::INFINITY,
        };
        out.row(format!("{}: h = {}, f = {}", case.label, case.h, case.f), left, r.bound + r.tol);
        if !r.zero_f_holds {
            out.fail(format!("{}: |c_h| = {} > {}", case.label, r.c_h.abs(), r.zero_f_bound));
        }
        let err = (r.bound - case.bound).abs().max((r.c_h - case.c_h).abs());
        out.residual(err, || format!("{}: quadrature error {err:e}", case.label));
        if err > 1e-6 {
            out.fail(format!("{}: quadrature error {err:e} against closed form", case.label));
        }
    }
    Ok(())
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Result<SampleCloud> {
    let points = (0..n)
        .map(|_| {
            PhasePoint::new(vec![rng.gen_range(-half..half)], vec![rng.gen_range(-half..half)])
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SampleCloud::new(points)?)
}

fn two_param(out: &mut SuiteOutcome, rng: &mut ChaCha8Rng, sizes: &SuiteSizes) -> Result<()> {
    let tol = sizes.identity_tol;
    let samples = random_cloud(rng, sizes.identity_samples.max(1), 1.0)?;
    let options = IdentityOptions::default();
    for text in two_param_families() {
        let fam = crate::numerics::TwoParamFamily::from_expr(parse(text, 1)?);
        let r = verify_vector_field_identity(&fam, &samples, &options, tol)?;
        out.row(format!("identity residual, G = {text}"), r.max_residual, tol);
        out.row(format!("V(s', 0), G = {text}"), r.boundary, tol);
        out.row(format!("zero-family control, G = {text}"), r.zero_control, 1e-6);
        out.residual(r.max_residual, || format!("G = {text} at {:?}", r.worst));
    }

    let shift = ShiftIdentityOptions::default();
    for case in point_cases() {
        let h = parse(case.h, 0)?;
        let f = ScalarPath::new(parse(case.f, 0)?)?;
        let r = verify_family_shift_identity(&h, &f, &shift)?;
        out.row(format!("shift identity, {}", case.label), r.residual, shift.tol);
        if !r.holds {
            out.fail(format!("{}: c_G1 = {} but c_h = {}", case.label, r.c_g1, r.c_h));
        }
    }

    let (text, support) = compact_hamiltonians()[0];
    let h = parse(text, 1)?;
    let a = random_cloud(rng, 4, 0.8)?;
    let family_options = FamilyOptions {
        grid: TimeGrid::trapezoid(201)?,
        step: 2e-3,
        support_radius: Some(support),
    };
    let f = ScalarPath::new(parse("s/2 - 1/4", 0)?)?;
    let fam = build_interpolating_family(&h, &f, &a, 0.02, 20.0, &family_options)?;
    let r = check_sprime_independence(&fam, &a, &TimeGrid::trapezoid(101)?, &[(0.0, 1.0), (0.3, 0.8)], 2e-3, 1e-4)?;
    out.row(format!("s'-independence near A, H = {text}"), r.max_deviation, r.tol);
    Ok(())
}

fn reparam(out: &mut SuiteOutcome) -> Result<()> {
    let sigma = parse("s^2", 0)?;
    for case in point_cases() {
        let h = parse(case.h, 0)?;
        let k = reparametrize(&h, &sigma)?;
        let ch = PointModelQuantization::new(&h)?.shift();
        let ck = PointModelQuantization::new(&k)?.shift();
        out.row(format!("c_h under s -> s^2, h = {}", case.h), (ch - ck).abs(), 1e-6);
    }
    let a = SampleCloud::new(vec![
        PhasePoint::new(vec![0.5], vec![0.0])?,
        PhasePoint::new(vec![-0.3], vec![0.6])?,
        PhasePoint::new(vec![1.0], vec![1.0])?,
    ])?;
    let grid = TimeGrid::default();
    let z = PhasePoint::new(vec![0.4], vec![-0.9])?;
    let hams = exact_flows().into_iter().map(|e| e.h).chain(compact_hamiltonians().into_iter().map(|c| c.0));
    for text in hams {
        let h = parse(text, 1)?;
        let k = reparametrize(&h, &sigma)?;
        let oh = osc_norm_restricted(&h, &a, &grid)?;
        let ok = osc_norm_restricted(&k, &a, &grid)?;
        out.row(format!("restricted oscillation, H = {text}"), (oh - ok).abs(), 1e-5);
        let fh = flow(&h, &z, 0.0, 1.0, 1e-3)?;
        let fk = flow(&k, &z, 0.0, 1.0, 1e-3)?;
        out.row(format!("time-one map, H = {text}"), fh.distance(&fk), 1e-6);
    }
    Ok(())
}

