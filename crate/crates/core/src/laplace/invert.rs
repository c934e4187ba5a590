use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::kernel::{rank_of, sorted_svd, RowCompressor};
use super::{nnls, LIMap, Spectrum, T2Grid};
use crate::series::TimeSeries;
use crate::{Error, Result};

/// Scale between the user-facing `alpha` and the penalty on the noise-whitened misfit.
///
/// With this scale the documented default `alpha = 0.1` and the 0.1–10 range give
/// regularisation comparable to the literal objective on a unit-amplitude trace.
pub const ALPHA_SCALE: f64 = 1000.0;

/// Knobs for [`invert_with`]. The defaults are what [`invert`] uses.
#[derive(Clone, Debug)]
pub struct InvertOptions {
    /// Singular-value cut for the reduced solve; `None` solves the full system.
    pub rank_tol: Option<f64>,
    /// Per-sample noise level; overrides the trace meta and the internal estimate.
    pub noise_sigma: Option<f64>,
    /// Weight binned rows by the square root of their population.
    pub population_weighting: bool,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions { rank_tol: Some(1e-10), noise_sigma: None, population_weighting: true }
    }
}

/// Robust per-sample noise level from first differences (MAD / (0.6745 sqrt 2)).
pub fn estimate_noise_sigma(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let mut d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    let med = d[d.len() / 2];
    let mut dev: Vec<f64> = d.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    dev[dev.len() / 2] / (0.6745 * std::f64::consts::SQRT_2)
}

fn noise_sigma(trace: &TimeSeries, opts: &InvertOptions) -> f64 {
    let smax = trace.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = opts
        .noise_sigma
        .or_else(|| trace.meta_f64("noise_sigma"))
        .or_else(|| trace.meta_f64("noise_sigma_est"))
        .unwrap_or_else(|| if trace.counts().is_some() { 0.0 } else { estimate_noise_sigma(trace.values()) });
    s.max(1e-4 * smax)
}

/// Nonnegative Tikhonov inversion with default options (see the module docs for the objective).
pub fn invert(trace: &TimeSeries, grid: &T2Grid, alpha: f64) -> Result<Spectrum> {
    invert_with(trace, grid, alpha, &InvertOptions::default())
}

pub fn invert_with(trace: &TimeSeries, grid: &T2Grid, alpha: f64, opts: &InvertOptions) -> Result<Spectrum> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite and >= 0"));
    }
    if trace.len() < 10 {
        return Err(Error::invalid(format!("trace has {} samples, need at least 10", trace.len())));
    }
    let (t, s) = (trace.times(), trace.values());
    let n = grid.len();
    let g = grid.points();
    if s.iter().all(|&v| v == 0.0) {
        let mut sp = Spectrum::new(grid.clone(), vec![0.0; n])?;
        sp.alpha = alpha;
        sp.residual_norm = 0.0;
        sp.objective = 0.0;
        return Ok(sp);
    }

    let sigma = noise_sigma(trace, opts);
    let row_w: Vec<f64> = match (trace.counts(), opts.population_weighting) {
        (Some(c), true) => c.iter().map(|&k| (k as f64).sqrt() / sigma).collect(),
        _ => vec![1.0 / sigma; t.len()],
    };
    let lam = (alpha * ALPHA_SCALE).sqrt();

    let (a, b) = match opts.rank_tol {
        Some(tol) => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::invalid("rank_tol must lie in (0, 1)"));
            }
            let mut rc = RowCompressor::new(n + 1);
            let mut row = vec![0.0; n + 1];
            for i in 0..t.len() {
                for j in 0..n {
                    row[j] = row_w[i] * (-t[i] / g[j]).exp();
                }
                row[n] = row_w[i] * s[i];
                rc.push_row(&row);
            }
            let r = rc.finish();
            let rk = r.view((0, 0), (n, n)).into_owned();
            let qs = r.view((0, n), (n, 1)).into_owned();
            let (u, sv, vt) = sorted_svd(rk);
            let rank = rank_of(&sv, tol).max(1);
            let mut a = DMatrix::zeros(rank + n, n);
            for i in 0..rank {
                for j in 0..n {
                    a[(i, j)] = sv[i] * vt[(i, j)];
                }
            }
            let mut b = DVector::zeros(rank + n);
            let proj = u.columns(0, rank).transpose() * qs;
            b.rows_mut(0, rank).copy_from(&proj.column(0));
            (a, b)
        }
        None => {
            let m = t.len();
            let mut a = DMatrix::zeros(m + n, n);
            let mut b = DVector::zeros(m + n);
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] = row_w[i] * (-t[i] / g[j]).exp();
                }
                b[i] = row_w[i] * s[i];
            }
            (a, b)
        }
    };
    let mut a = a;
    let off = a.nrows() - n;
    for j in 0..n {
        a[(off + j, j)] = lam;
    }

    let sol = nnls(&a, &b)?;
    let weights: Vec<f64> = sol.x.iter().map(|&w| w.max(0.0)).collect();

    // residual and objective evaluated on the trace itself
    let active: Vec<usize> = (0..n).filter(|&j| weights[j] > 0.0).collect();
    let (mut rss, mut wrss) = (0.0, 0.0);
    for i in 0..t.len() {
        let f: f64 = active.iter().map(|&j| weights[j] * (-t[i] / g[j]).exp()).sum();
        let d = s[i] - f;
        rss += d * d;
        wrss += row_w[i] * row_w[i] * d * d;
    }
    let wn2: f64 = weights.iter().map(|w| w * w).sum();
    let mut sp = Spectrum::new(grid.clone(), weights)?;
    sp.alpha = alpha;
    sp.residual_norm = rss.sqrt();
    sp.objective = wrss + lam * lam * wn2;
    Ok(sp)
}

/// `values[i] = sum_j w_j exp(-t_i / T2_j)`.
pub fn forward_model(spectrum: &Spectrum, times: &[f64]) -> Result<TimeSeries> {
    let g = spectrum.grid.points();
    let active: Vec<usize> = (0..g.len()).filter(|&j| spectrum.weights[j] != 0.0).collect();
    let values = times
        .iter()
        .map(|&t| active.iter().map(|&j| spectrum.weights[j] * (-t / g[j]).exp()).sum())
        .collect();
    TimeSeries::new(times.to_vec(), values)
}

/// Inverts each labelled trace on a common grid. Slices are solved in parallel; output order
/// follows input order.
pub fn li_map(parameter: &str, traces: &[(f64, TimeSeries)], grid: &T2Grid, alpha: f64) -> Result<LIMap> {
    if traces.len() < 2 {
        return Err(Error::invalid("li_map needs at least 2 traces"));
    }
    let vals: Vec<f64> = traces.iter().map(|(v, _)| *v).collect();
    let inc = vals.windows(2).all(|w| w[1] > w[0]);
    let dec = vals.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::invalid("sweep values must be strictly monotone"));
    }
    let spectra = traces
        .par_iter()
        .map(|(v, tr)| invert(tr, grid, alpha).map_err(|e| e.in_slice(format!("{parameter}={v}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(LIMap { parameter: parameter.to_string(), sweep_values: vals, spectra })
}
