//! Synthetic decays, Gaussian noise and AC-sensing signals.

mod sense;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::laplace::LogBinner;
use crate::series::TimeSeries;
use crate::{Error, Result};

pub use sense::{ac_imprint, integrated_signal, moving_mean, snr_window, ACField};

/// `S(t) = baseline + sum_j w_j exp(-t / T2_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayModel {
    /// `(weight, T2 in seconds)` pairs.
    pub components: Vec<(f64, f64)>,
    pub baseline: f64,
}

impl DecayModel {
    pub fn new(components: Vec<(f64, f64)>, baseline: f64) -> Result<Self> {
        let m = DecayModel { components, baseline };
        m.validate()?;
        Ok(m)
    }

    /// Equal weights summing to one, no baseline.
    pub fn equal_weights(t2s: &[f64]) -> Result<Self> {
        let w = 1.0 / t2s.len().max(1) as f64;
        Self::new(t2s.iter().map(|&t| (w, t)).collect(), 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("decay model needs at least one component"));
        }
        for &(w, t2) in &self.components {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!("component weight must be finite and >= 0, got {w}")));
            }
            if !(t2 > 0.0) || !t2.is_finite() {
                return Err(Error::invalid(format!("component T2 must be finite and > 0, got {t2}")));
            }
        }
        if !self.baseline.is_finite() {
            return Err(Error::invalid("baseline must be finite"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.baseline + self.components.iter().map(|&(w, t2)| w * (-t / t2).exp()).sum::<f64>()
    }
}

pub fn synth_decay(model: &DecayModel, times: &[f64]) -> Result<TimeSeries> {
    model.validate()?;
    TimeSeries::from_fn(times.to_vec(), |t| model.value_at(t))
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))
}

/// Adds i.i.d. N(0, sigma^2) noise per sample. The same seed gives the same noise.
/// The level is recorded in meta as `noise_sigma`.
pub fn add_noise(trace: &TimeSeries, sigma: f64, seed: u64) -> Result<TimeSeries> {
    let dist = normal(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = trace.values().iter().map(|&v| v + dist.sample(&mut rng)).collect();
    let out = trace.with_values(values)?;
    Ok(out.with_meta("noise_sigma", format!("{sigma:e}")))
}

/// A long, uniformly sampled noisy decay that is log-binned on the fly and never held in memory.
#[derive(Clone, Debug)]
pub struct Surrogate {
    pub model: DecayModel,
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    pub sigma: f64,
    pub seed: u64,
    pub bins_per_decade: f64,
    pub t_floor: f64,
}

impl Surrogate {
    /// 32M samples over [0.01, 600] s, binned at 50 per decade above 0.1 s.
    pub fn new(model: DecayModel, sigma: f64, seed: u64) -> Self {
        Surrogate {
            model,
            t_start: 0.01,
            t_end: 600.0,
            n_samples: 32_000_000,
            sigma,
            seed,
            bins_per_decade: 50.0,
            t_floor: 0.1,
        }
    }

    /// Keeps the sample density and cuts the record at `t_end`.
    pub fn truncated(&self, t_end: f64) -> Self {
        let frac = (t_end - self.t_start) / (self.t_end - self.t_start);
        Surrogate { t_end, n_samples: ((self.n_samples as f64) * frac).round() as usize, ..self.clone() }
    }

    pub fn generate(&self) -> Result<TimeSeries> {
        self.model.validate()?;
        if !(self.t_start >= 0.0) || !(self.t_end > self.t_start) || self.n_samples < 2 {
            return Err(Error::invalid("surrogate needs 0 <= t_start < t_end and >= 2 samples"));
        }
        let dist = normal(self.sigma)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut binner = LogBinner::new(self.bins_per_decade, self.t_floor)?;
        let dt = (self.t_end - self.t_start) / (self.n_samples - 1) as f64;
        for i in 0..self.n_samples {
            let t = self.t_start + i as f64 * dt;
            binner.push(t, self.model.value_at(t) + dist.sample(&mut rng))?;
        }
        Ok(binner.finish()?.with_meta("noise_sigma", format!("{:e}", self.sigma)))
    }
}
