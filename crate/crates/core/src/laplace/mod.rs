//! Regularised nonnegative Laplace inversion of multi-exponential decays.
//!
//! The solver minimises the noise-whitened, population-weighted Tikhonov objective
//! `sum_b n_b (s_b - (K W)_b)^2 / sigma^2 + ALPHA_SCALE * alpha * |W|^2` with `W >= 0`.
//! `n_b` is the bin population (1 for raw samples) and `sigma` the per-sample noise level.

mod binning;
pub mod io;
mod invert;
mod kernel;
mod lifetime;
mod nnls;
mod peaks;

pub use binning::{log_bin, LogBinner};
pub use invert::{estimate_noise_sigma, forward_model, invert, invert_with, li_map, InvertOptions, ALPHA_SCALE};
pub use kernel::{build_kernel, compress_kernel, CompressedKernel, KernelMatrix};
pub use lifetime::one_over_e_lifetime;
pub use nnls::{nnls, NnlsSolution};
pub use peaks::{spectrum_peaks, Peak};

use crate::{Error, Result};

/// Logarithmically spaced relaxation-time grid (s).
#[derive(Clone, Debug, PartialEq)]
pub struct T2Grid {
    points: Vec<f64>,
}

impl T2Grid {
    pub fn log(t2_min: f64, t2_max: f64, n: usize) -> Result<Self> {
        if !(t2_min > 0.0) || !(t2_max > t2_min) || !t2_max.is_finite() {
            return Err(Error::invalid("T2 grid needs 0 < t2_min < t2_max"));
        }
        if n < 2 {
            return Err(Error::invalid("T2 grid needs at least 2 points"));
        }
        Ok(T2Grid { points: crate::series::logspace(t2_min, t2_max, n) })
    }

    /// Validates an explicit point list (must be log-uniform).
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || !(points[0] > 0.0) {
            return Err(Error::invalid("T2 grid needs >= 2 positive points"));
        }
        let logs: Vec<f64> = points.iter().map(|p| p.log10()).collect();
        let step = (logs[logs.len() - 1] - logs[0]) / (logs.len() - 1) as f64;
        if !(step > 0.0) {
            return Err(Error::invalid("T2 grid must be strictly increasing"));
        }
        for (i, l) in logs.iter().enumerate() {
            let expect = logs[0] + step * i as f64;
            if (l - expect).abs() > 1e-12 * expect.abs().max(step) {
                return Err(Error::invalid("T2 grid is not log-uniform"));
            }
        }
        Ok(T2Grid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    /// Index of the grid point nearest `t2` in log distance.
    pub fn nearest(&self, t2: f64) -> usize {
        let l = t2.ln();
        (0..self.points.len())
            .min_by(|&a, &b| {
                (self.points[a].ln() - l).abs().total_cmp(&(self.points[b].ln() - l).abs())
            })
            .unwrap()
    }
}

impl Default for T2Grid {
    /// 200 points over [1e-3, 1e4] s.
    fn default() -> Self {
        T2Grid::log(1e-3, 1e4, 200).unwrap()
    }
}

/// Nonnegative weights over a [`T2Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: T2Grid,
    pub weights: Vec<f64>,
    pub alpha: f64,
    /// `|S - K W|_2` over the trace that was inverted (unweighted).
    pub residual_norm: f64,
    /// Value of the solved (whitened, weighted) objective.
    pub objective: f64,
}

impl Spectrum {
    pub fn new(grid: T2Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::invalid("weights and grid differ in length"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and >= 0"));
        }
        Ok(Spectrum { grid, weights, alpha: 0.0, residual_norm: f64::NAN, objective: f64::NAN })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn peaks(&self, min_weight_frac: f64) -> Vec<Peak> {
        spectrum_peaks(self, min_weight_frac)
    }
}

/// One spectrum per value of a swept parameter, all on the same grid.
#[derive(Clone, Debug)]
pub struct LIMap {
    pub parameter: String,
    pub sweep_values: Vec<f64>,
    pub spectra: Vec<Spectrum>,
}

impl LIMap {
    pub fn grid(&self) -> &T2Grid {
        &self.spectra[0].grid
    }
}
