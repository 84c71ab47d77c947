use rayon::prelude::*;

use crate::hamexpr::Expr;

use super::flow::{integrate_through, Hamiltonian};
use super::{Result, SampleCloud, ScalarPath, TimeGrid};

/// Pointwise maxima and minima of `H_s` over a cloud, one entry per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrema {
    pub times: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
}

impl Extrema {
    fn from_columns(times: Vec<f64>, columns: &[Vec<f64>]) -> Self {
        let n = times.len();
        let mut max = vec![f64::NEG_INFINITY; n];
        let mut min = vec![f64::INFINITY; n];
        for col in columns {
            for k in 0..n {
                max[k] = max[k].max(col[k]);
                min[k] = min[k].min(col[k]);
            }
        }
        Extrema { times, max, min }
    }
}

/// Values of `H_s` along `φ^H_s(z)` at each grid time, for every `z` in `a`.
pub(crate) fn advected_values(
    ham: &Hamiltonian,
    a: &SampleCloud,
    times: &[f64],
    step: f64,
) -> Result<Vec<Vec<f64>>> {
    a.check_dim(ham.dim())?;
    a.points()
        .par_iter()
        .map(|z| {
            let states = integrate_through(|x, s| ham.field(x, s, 0.0), &z.state(), times, step)?;
            states
                .iter()
                .zip(times)
                .map(|(x, &s)| ham.value(x, s, 0.0))
                .collect()
        })
        .collect()
}

/// Extrema of `H_s` over the advected cloud `φ^H_s(A)`.
pub fn advected_extrema(h: &Expr, a: &SampleCloud, grid: &TimeGrid, step: f64) -> Result<Extrema> {
    let ham = Hamiltonian::new(h.clone());
    let times = grid.times();
    let columns = advected_values(&ham, a, &times, step)?;
    Ok(Extrema::from_columns(times, &columns))
}

/// `∫₀¹ (max H_s - min H_s) ds` over the samples of `domain`. With
/// `pad_zero`, 0 joins both the max and the min candidates, which is the
/// value a compactly supported `H` takes far out in a noncompact space.
pub fn osc_norm(h: &Expr, domain: &SampleCloud, grid: &TimeGrid, pad_zero: bool) -> Result<f64> {
    domain.check_dim(h.dim())?;
    let ham = Hamiltonian::new(h.clone());
    let spreads = grid
        .times()
        .par_iter()
        .map(|&s| {
            let mut hi = if pad_zero { 0.0 } else { f64::NEG_INFINITY };
            let mut lo = if pad_zero { 0.0 } else { f64::INFINITY };
            for z in domain.points() {
                let v = ham.value(&z.state(), s, 0.0)?;
                hi = hi.max(v);
                lo = lo.min(v);
            }
            Ok(hi - lo)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid.integrate(&spreads))
}

/// `‖H‖_{osc,A}`: the oscillation over the fixed (not advected) samples of `A`.
pub fn osc_norm_restricted(h: &Expr, a: &SampleCloud, grid: &TimeGrid) -> Result<f64> {
    osc_norm(h, a, grid, false)
}

/// `B(H, f, A) = ∫₀¹ max{max_{φ_s(A)} H_s, f(s)} - min{min_{φ_s(A)} H_s, f(s)} ds`.
pub fn bound_b(h: &Expr, f: &ScalarPath, a: &SampleCloud, grid: &TimeGrid, step: f64) -> Result<f64> {
    let ext = advected_extrema(h, a, grid, step)?;
    let integrand = ext
        .times
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let fs = f.at(s)?;
            Ok(ext.max[k].max(fs) - ext.min[k].min(fs))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid.integrate(&integrand))
}
