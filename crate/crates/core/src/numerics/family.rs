use rayon::prelude::*;
use serde::Serialize;

use crate::hamexpr::{bump_value, differentiate, smooth_step, Expr, Var};

use super::clamp::{smooth_clamp, SmoothClamp};
use super::flow::{integrate, integrate_through, symplectic_gradient, Hamiltonian, DEFAULT_STEP};
use super::{NumericsError, Result, SampleCloud, ScalarPath, TimeGrid};

/// Node values on a uniform partition of `[0, 1]`, joined by smooth steps:
/// on each interval the value moves from one node value to the next along
/// `S`, so the result is `C^∞`, has all derivatives zero at the nodes, and
/// stays between neighbouring node values.
#[derive(Debug, Clone, PartialEq)]
struct SmoothedTable {
    values: Vec<f64>,
}

impl SmoothedTable {
    fn at(&self, s: f64) -> f64 {
        let last = self.values.len() - 1;
        let x = (s * last as f64).clamp(0.0, last as f64);
        let k = (x.floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return self.values[0];
        }
        let t = x - k as f64;
        let (lo, hi) = (self.values[k], self.values[k + 1]);
        lo + (hi - lo) * smooth_step(t)
    }
}

/// Parameters recorded by [`build_interpolating_family`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMetadata {
    pub eps: f64,
    /// The constant `R` that widens the clamp window as `s'` grows.
    pub range: f64,
    /// Overshoot parameter of the clamp `ρ`.
    pub clamp_eps: f64,
    /// `χ(z) = bump(|z|²; chi_radius)`.
    pub chi_radius: f64,
    pub nodes: usize,
    /// `∫₀¹ f̃(s) ds`.
    pub ftilde_integral: f64,
    /// `∫₀¹ f(s) ds`.
    pub f_integral: f64,
}

#[derive(Debug, Clone)]
struct Interpolating {
    h: Hamiltonian,
    upper: SmoothedTable,
    lower: SmoothedTable,
    ftilde: SmoothedTable,
    meta: FamilyMetadata,
}

impl Interpolating {
    fn clamp(&self, s: f64, sp: f64) -> SmoothClamp {
        let a = self.lower.at(s) - self.meta.range * sp;
        let b = self.upper.at(s) + self.meta.range * sp;
        smooth_clamp(a, b, self.meta.clamp_eps).expect("envelopes are ordered")
    }

    fn chi(&self, z: &[f64]) -> (f64, f64) {
        let r2: f64 = z.iter().map(|x| x * x).sum();
        (
            bump_value(0, r2, self.meta.chi_radius),
            bump_value(1, r2, self.meta.chi_radius),
        )
    }

    fn value(&self, z: &[f64], s: f64, sp: f64) -> Result<f64> {
        let h = self.h.value(z, s, 0.0)?;
        let rho = self.clamp(s, sp).apply(h);
        Ok((rho - (1.0 - sp) * self.ftilde.at(s)) * self.chi(z).0)
    }

    fn gradient(&self, z: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        let h = self.h.value(z, s, 0.0)?;
        let jet = self.clamp(s, sp).jet(h);
        let (chi, dchi) = self.chi(z);
        let inner = jet.value - (1.0 - sp) * self.ftilde.at(s);
        let mut grad = if jet.dy == 0.0 {
            vec![0.0; z.len()]
        } else {
            self.h.gradient(z, s, 0.0)?
        };
        for (g, x) in grad.iter_mut().zip(z) {
            *g = jet.dy * *g * chi + inner * dchi * 2.0 * x;
        }
        Ok(grad)
    }
}

#[derive(Debug, Clone)]
enum Generator {
    Expr { g: Hamiltonian, dsp: Hamiltonian },
    Interpolating(Box<Interpolating>),
}

/// A two-parameter family `G_{s',s}` and its flows `φ_{s',s}` in `s`
/// starting from the identity at `s = 0`.
#[derive(Debug, Clone)]
pub struct TwoParamFamily {
    generator: Generator,
}

const SPRIME_DIFF: f64 = 1e-5;

impl TwoParamFamily {
    /// A family given by an expression in `q, p, s, sp`.
    pub fn from_expr(g: Expr) -> Self {
        let dsp = Hamiltonian::new(differentiate(&g, Var::Sp));
        TwoParamFamily {
            generator: Generator::Expr {
                g: Hamiltonian::new(g),
                dsp,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match &self.generator {
            Generator::Expr { g, .. } => g.dim(),
            Generator::Interpolating(i) => i.h.dim(),
        }
    }

    pub fn metadata(&self) -> Option<&FamilyMetadata> {
        match &self.generator {
            Generator::Expr { .. } => None,
            Generator::Interpolating(i) => Some(&i.meta),
        }
    }

    /// `(m(s), M(s), f̃(s))` for a family built by the interpolation.
    pub fn envelopes(&self, s: f64) -> Option<(f64, f64, f64)> {
        match &self.generator {
            Generator::Expr { .. } => None,
            Generator::Interpolating(i) => Some((i.lower.at(s), i.upper.at(s), i.ftilde.at(s))),
        }
    }

    pub fn value(&self, z: &[f64], s: f64, sp: f64) -> Result<f64> {
        match &self.generator {
            Generator::Expr { g, .. } => g.value(z, s, sp),
            Generator::Interpolating(i) => i.value(z, s, sp),
        }
    }

    /// `X_{G_{s',s}}(z)`.
    pub fn field(&self, z: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        match &self.generator {
            Generator::Expr { g, .. } => g.field(z, s, sp),
            Generator::Interpolating(i) => Ok(symplectic_gradient(&i.gradient(z, s, sp)?)),
        }
    }

    /// `X_{∂G/∂s'}(z)`; symbolic for expression families, a central
    /// difference in `s'` otherwise.
    pub fn sprime_field(&self, z: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        match &self.generator {
            Generator::Expr { dsp, .. } => dsp.field(z, s, sp),
            Generator::Interpolating(_) => {
                let hi = self.field(z, s, sp + SPRIME_DIFF)?;
                let lo = self.field(z, s, sp - SPRIME_DIFF)?;
                Ok(hi
                    .iter()
                    .zip(&lo)
                    .map(|(a, b)| (a - b) / (2.0 * SPRIME_DIFF))
                    .collect())
            }
        }
    }

    /// `φ_{s',s1} ∘ φ_{s',s0}^{-1}` applied to `z`.
    pub fn flow(&self, z: &[f64], sp: f64, s0: f64, s1: f64, step: f64) -> Result<Vec<f64>> {
        integrate(|x, s| self.field(x, s, sp), z, s0, s1, step)
    }

    /// `φ_{s',s}(z)` at each of `times`, starting from `z` at `times[0]`.
    pub fn trajectory(&self, z: &[f64], sp: f64, times: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
        integrate_through(|x, s| self.field(x, s, sp), z, times, step)
    }

    /// `∫₀¹ (max G_{s',s} - min G_{s',s}) ds` over the samples of `domain`,
    /// with the same `pad_zero` convention as [`super::osc_norm`].
    pub fn osc_norm(&self, sp: f64, domain: &SampleCloud, grid: &TimeGrid, pad_zero: bool) -> Result<f64> {
        domain.check_dim(self.dim())?;
        let spreads = grid
            .times()
            .par_iter()
            .map(|&s| {
                let mut hi = if pad_zero { 0.0 } else { f64::NEG_INFINITY };
                let mut lo = if pad_zero { 0.0 } else { f64::INFINITY };
                for z in domain.points() {
                    let v = self.value(&z.state(), s, sp)?;
                    hi = hi.max(v);
                    lo = lo.min(v);
                }
                Ok(hi - lo)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(grid.integrate(&spreads))
    }

    /// `∫₀¹ G_{s',s} ds` in the point model, the translation by which the
    /// time-one map of `G_{s'}` acts.
    pub fn point_shift(&self, sp: f64, grid: &TimeGrid) -> Result<f64> {
        if self.dim() != 0 {
            return Err(NumericsError::DimensionMismatch {
                expected: 0,
                found: self.dim(),
            });
        }
        let values = grid
            .times()
            .iter()
            .map(|&s| self.value(&[], s, sp))
            .collect::<Result<Vec<_>>>()?;
        Ok(grid.integrate(&values))
    }
}

/// Knobs for [`build_interpolating_family`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions {
    pub grid: TimeGrid,
    pub step: f64,
    /// Radius of a ball containing the supports of all `H_s`, if known.
    pub support_radius: Option<f64>,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            grid: TimeGrid::default(),
            step: DEFAULT_STEP,
            support_radius: None,
        }
    }
}

/// Builds `G_{s',s} = (ρ_{a,b}(H_s) - (1 - s') f̃(s)) χ` with
/// `a = m(s) - R s'`, `b = M(s) + R s'`.
///
/// The envelopes satisfy `max_{φ_s(A)} H_s + ε/2 <= M(s) <= max + ε` and
/// `min - ε <= m(s) <= min - ε/2`, and `|f̃ - f| <= ε/4`; all three are
/// checked on the grid refined once, and a violation is an
/// `EnvelopeFailure`. The clamp overshoots by at most `ε/4`, so the
/// oscillation of `G_{0,·}` stays within `B(H, f, A) + 3ε`.
pub fn build_interpolating_family(
    h: &Expr,
    f: &ScalarPath,
    a: &SampleCloud,
    eps: f64,
    range: f64,
    options: &FamilyOptions,
) -> Result<TwoParamFamily> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(NumericsError::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    a.check_dim(h.dim())?;
    let ham = Hamiltonian::new(h.clone());
    let fine = options.grid.refined();
    let times = fine.times();

    let paths = a
        .points()
        .par_iter()
        .map(|z| integrate_through(|x, s| ham.field(x, s, 0.0), &z.state(), &times, options.step))
        .collect::<Result<Vec<_>>>()?;

    let nodes = times.len();
    let mut adv_max = vec![f64::NEG_INFINITY; nodes];
    let mut adv_min = vec![f64::INFINITY; nodes];
    let mut all_max = f64::NEG_INFINITY;
    let mut all_min = f64::INFINITY;
    let mut reach: f64 = 0.0;
    for (z, path) in a.points().iter().zip(&paths) {
        for (k, (x, &s)) in path.iter().zip(&times).enumerate() {
            let v = ham.value(x, s, 0.0)?;
            adv_max[k] = adv_max[k].max(v);
            adv_min[k] = adv_min[k].min(v);
            let fixed = ham.value(&z.state(), s, 0.0)?;
            all_max = all_max.max(v).max(fixed);
            all_min = all_min.min(v).min(fixed);
            reach = reach.max(x.iter().map(|c| c * c).sum::<f64>().sqrt());
        }
        reach = reach.max(z.state().iter().map(|c| c * c).sum::<f64>().sqrt());
    }
    if !(range > all_max - all_min + 2.0 * eps) {
        return Err(NumericsError::InvalidParameter(format!(
            "R = {range} must exceed the sampled range of H plus 2ε ({})",
            all_max - all_min + 2.0 * eps
        )));
    }

    let f_fine = times.iter().map(|&s| f.at(s)).collect::<Result<Vec<f64>>>()?;
    let coarse = |v: &[f64], offset: f64| SmoothedTable {
        values: v.iter().step_by(2).map(|x| x + offset).collect(),
    };
    let upper = coarse(&adv_max, 0.75 * eps);
    let lower = coarse(&adv_min, -0.75 * eps);
    let ftilde = coarse(&f_fine, 0.0);

    for (k, &s) in times.iter().enumerate() {
        let (hi, lo, ft) = (upper.at(s), lower.at(s), ftilde.at(s));
        if !(adv_max[k] + 0.5 * eps <= hi && hi <= adv_max[k] + eps) {
            return Err(NumericsError::EnvelopeFailure(format!(
                "upper envelope {hi} leaves [{}, {}] at s = {s}; refine the grid or raise ε",
                adv_max[k] + 0.5 * eps,
                adv_max[k] + eps
            )));
        }
        if !(adv_min[k] - eps <= lo && lo <= adv_min[k] - 0.5 * eps) {
            return Err(NumericsError::EnvelopeFailure(format!(
                "lower envelope {lo} leaves [{}, {}] at s = {s}; refine the grid or raise ε",
                adv_min[k] - eps,
                adv_min[k] - 0.5 * eps
            )));
        }
        if (ft - f_fine[k]).abs() > 0.25 * eps {
            return Err(NumericsError::EnvelopeFailure(format!(
                "smoothed f deviates by {} at s = {s}",
                (ft - f_fine[k]).abs()
            )));
        }
    }

    let support = options.support_radius.unwrap_or(0.0).max(reach);
    let chi_radius = 2.0 * (1.05 * support.max(1.0)).powi(2);
    let coarse_grid = options.grid;
    let ft_values: Vec<f64> = coarse_grid.times().iter().map(|&s| ftilde.at(s)).collect();
    let meta = FamilyMetadata {
        eps,
        range,
        clamp_eps: 0.5 * eps,
        chi_radius,
        nodes: coarse_grid.nodes(),
        ftilde_integral: coarse_grid.integrate(&ft_values),
        f_integral: f.integral(),
    };
    let family = TwoParamFamily {
        generator: Generator::Interpolating(Box::new(Interpolating {
            h: ham.clone(),
            upper,
            lower,
            ftilde,
            meta,
        })),
    };

    for z in a.points() {
        for &s in coarse_grid.times().iter().step_by(10) {
            let g1 = family.value(&z.state(), s, 1.0)?;
            let hs = ham.value(&z.state(), s, 0.0)?;
            if (g1 - hs).abs() > 1e-12 * (1.0 + hs.abs()) {
                return Err(NumericsError::EnvelopeFailure(format!(
                    "G_1 = {g1} differs from H = {hs} at a sample, s = {s}"
                )));
            }
        }
    }
    Ok(family)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
    /// `(sample index, s, s'1, s'2)` where the maximum occurred.
    pub worst: Option<(usize, f64, f64, f64)>,
}

/// Max over samples `z`, grid times `s` and pairs `(s'1, s'2)` of
/// `|φ_{s'1,s}(z) - φ_{s'2,s}(z)|`.
pub fn check_sprime_independence(
    fam: &TwoParamFamily,
    a: &SampleCloud,
    grid: &TimeGrid,
    pairs: &[(f64, f64)],
    step: f64,
    tol: f64,
) -> Result<IndependenceReport> {
    a.check_dim(fam.dim())?;
    let times = grid.times();
    let jobs: Vec<(usize, f64, f64)> = (0..a.len())
        .flat_map(|i| pairs.iter().map(move |&(u, v)| (i, u, v)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, u, v)| {
            let z = a.points()[i].state();
            let one = fam.trajectory(&z, u, &times, step)?;
            let two = fam.trajectory(&z, v, &times, step)?;
            let mut best = (0.0f64, 0.0);
            for (k, (x, y)) in one.iter().zip(&two).enumerate() {
                let d = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                if d > best.0 {
                    best = (d, times[k]);
                }
            }
            Ok((best.0, (i, best.1, u, v)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation = 0.0;
    let mut worst = None;
    for (d, at) in results {
        if worst.is_none() || d > max_deviation {
            max_deviation = d;
            worst = Some(at);
        }
    }
    Ok(IndependenceReport {
        max_deviation,
        tol,
        passed: max_deviation <= tol,
        worst,
    })
}

/// Knobs for [`verify_vector_field_identity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityOptions {
    /// `(s, s')` at which the identity is checked for every sample.
    pub times: Vec<(f64, f64)>,
    /// RK4 step for all flows.
    pub step: f64,
    /// Central-difference width in `s'` used to form `V`.
    pub diff: f64,
    /// Central-difference width in `s` and in space.
    pub probe: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions {
            times: vec![(0.5, 0.5)],
            step: DEFAULT_STEP,
            diff: 1e-4,
            probe: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Sup norm over samples of `∂_s V - X_{∂_{s'}G} - [X_G, V]`.
    pub max_residual: f64,
    /// The same residual for the zero family.
    pub zero_control: f64,
    /// Sup norm of `V(s', 0)` over samples.
    pub boundary: f64,
    pub tol: f64,
    pub passed: bool,
    pub checked: usize,
    /// `(sample index, s, s')` of the largest residual.
    pub worst: Option<(usize, f64, f64)>,
}

struct VField<'a> {
    fam: &'a TwoParamFamily,
    step: f64,
    diff: f64,
}

impl VField<'_> {
    /// `V(s', s)(w) = ∂_{s'} φ_{s',s}(φ_{s',s}^{-1}(w))`.
    fn at(&self, w: &[f64], s: f64, sp: f64) -> Result<Vec<f64>> {
        let z = self.fam.flow(w, sp, s, 0.0, self.step)?;
        let hi = self.fam.flow(&z, sp + self.diff, 0.0, s, self.step)?;
        let lo = self.fam.flow(&z, sp - self.diff, 0.0, s, self.step)?;
        Ok(hi
            .iter()
            .zip(&lo)
            .map(|(a, b)| (a - b) / (2.0 * self.diff))
            .collect())
    }
}

fn shifted(w: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    w.iter().zip(dir).map(|(a, d)| a + t * d).collect()
}

fn central(plus: &[f64], minus: &[f64], width: f64) -> Vec<f64> {
    plus.iter().zip(minus).map(|(a, b)| (a - b) / (2.0 * width)).collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual of `∂_s V = X_{∂_{s'}G} + [X_G, V]` at one point.
fn residual(vf: &VField<'_>, w: &[f64], s: f64, sp: f64, probe: f64) -> Result<f64> {
    let fam = vf.fam;
    let v = vf.at(w, s, sp)?;
    let ds_v = central(&vf.at(w, s + probe, sp)?, &vf.at(w, s - probe, sp)?, probe);
    let x = fam.field(w, s, sp)?;

    // D V · X_G, differencing along the unit direction of X_G
    let xn = sup(&x);
    let dv_x = if xn == 0.0 {
        vec![0.0; w.len()]
    } else {
        let dir: Vec<f64> = x.iter().map(|c| c / xn).collect();
        let d = central(
            &vf.at(&shifted(w, &dir, probe), s, sp)?,
            &vf.at(&shifted(w, &dir, -probe), s, sp)?,
            probe,
        );
        d.iter().map(|c| c * xn).collect()
    };
    // D X_G · V
    let vn = sup(&v);
    let dx_v = if vn == 0.0 {
        vec![0.0; w.len()]
    } else {
        let dir: Vec<f64> = v.iter().map(|c| c / vn).collect();
        let d = central(
            &fam.field(&shifted(w, &dir, probe), s, sp)?,
            &fam.field(&shifted(w, &dir, -probe), s, sp)?,
            probe,
        );
        d.iter().map(|c| c * vn).collect()
    };
    let forcing = fam.sprime_field(w, s, sp)?;
    let r: Vec<f64> = (0..w.len())
        .map(|i| ds_v[i] - forcing[i] - (dx_v[i] - dv_x[i]))
        .collect();
    Ok(sup(&r))
}

fn max_residual(
    fam: &TwoParamFamily,
    samples: &SampleCloud,
    options: &IdentityOptions,
) -> Result<(f64, Option<(usize, f64, f64)>)> {
    let vf = VField {
        fam,
        step: options.step,
        diff: options.diff,
    };
    let jobs: Vec<(usize, f64, f64)> = (0..samples.len())
        .flat_map(|i| options.times.iter().map(move |&(s, sp)| (i, s, sp)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(i, s, sp)| residual(&vf, &samples.points()[i].state(), s, sp, options.probe))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = (0.0, None);
    for (r, job) in values.into_iter().zip(jobs) {
        if best.1.is_none() || r > best.0 {
            best = (r, Some(job));
        }
    }
    Ok(best)
}

/// Checks `∂_s V = X_{∂_{s'}G} + [X_G, V]` with
/// `V = (∂_{s'} φ_{s',s}) ∘ φ_{s',s}^{-1}` and `[X, Y] = DX·Y - DY·X`,
/// every derivative taken by central differences of RK4 flows. This is the
/// vector-field form of `∂F/∂s = ∂G/∂s' - {F, G}` with `V = X_F`.
///
/// The same computation is run on the zero family first; if its residual
/// exceeds `tol / 10` the differencing is too noisy to judge and
/// `StepTooCoarse` is returned.
pub fn verify_vector_field_identity(
    fam: &TwoParamFamily,
    samples: &SampleCloud,
    options: &IdentityOptions,
    tol: f64,
) -> Result<IdentityReport> {
    samples.check_dim(fam.dim())?;
    let zero = TwoParamFamily::from_expr(Expr::zero(fam.dim()));
    let (zero_control, _) = max_residual(&zero, samples, options)?;
    if zero_control > tol / 10.0 {
        return Err(NumericsError::StepTooCoarse {
            noise: zero_control,
            limit: tol / 10.0,
        });
    }
    let (max_residual, worst) = max_residual(fam, samples, options)?;
    let vf = VField {
        fam,
        step: options.step,
        diff: options.diff,
    };
    let mut boundary: f64 = 0.0;
    for z in samples.points() {
        for &(_, sp) in &options.times {
            boundary = boundary.max(sup(&vf.at(&z.state(), 0.0, sp)?));
        }
    }
    let mut report = IdentityReport {
        max_residual,
        zero_control,
        boundary,
        tol,
        passed: false,
        checked: samples.len() * options.times.len(),
        worst,
    };
    report.passed = report.max_residual <= tol && report.boundary <= tol;
    Ok(report)
}
