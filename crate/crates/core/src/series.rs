use std::collections::BTreeMap;

use crate::{Error, Result};

/// A sampled decay trace: strictly increasing nonnegative times (s) and finite values.
///
/// `counts` holds per-sample populations when the trace was produced by binning;
/// `meta` is a free-form label map (offset_hz, flip_deg, noise_sigma, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    counts: Option<Vec<u64>>,
    meta: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ts = TimeSeries { times, values, counts: None, meta: BTreeMap::new() };
        ts.validate()?;
        Ok(ts)
    }

    pub fn with_counts(times: Vec<f64>, values: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != times.len() {
            return Err(Error::invalid("counts length differs from times length"));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::invalid("bin population must be positive"));
        }
        let ts = TimeSeries { times, values, counts: Some(counts), meta: BTreeMap::new() };
        ts.validate()?;
        Ok(ts)
    }

    /// Builds a trace on `times` by evaluating `f`.
    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::invalid("times and values differ in length"));
        }
        if self.times.len() < 2 {
            return Err(Error::invalid("a trace needs at least 2 samples"));
        }
        if !(self.times[0] >= 0.0) {
            return Err(Error::invalid("times must be >= 0"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("times must be finite and strictly increasing"));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at sample {i}")));
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.meta
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.trim().parse().ok())
    }

    /// Samples with `t <= t_max`, keeping meta and counts.
    pub fn truncate_time(&self, t_max: f64) -> Result<Self> {
        let n = self.times.partition_point(|&t| t <= t_max);
        let mut out = TimeSeries {
            times: self.times[..n].to_vec(),
            values: self.values[..n].to_vec(),
            counts: self.counts.as_ref().map(|c| c[..n].to_vec()),
            meta: self.meta.clone(),
        };
        out.validate()?;
        out.meta.insert("truncated_at_s".into(), t_max.to_string());
        Ok(out)
    }

    /// Same times, new values (meta and counts kept).
    pub fn map_values(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.times.iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        let out = TimeSeries { values, ..self.clone() };
        out.validate()?;
        Ok(out)
    }

    /// Same times, meta and counts; replacement values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.times.len() {
            return Err(Error::invalid("replacement values differ in length"));
        }
        let out = TimeSeries { values, ..self.clone() };
        out.validate()?;
        Ok(out)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.times, self.values)
    }
}

/// `n` uniformly spaced times on `[t0, t1]` inclusive.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t0];
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    (0..n).map(|i| t0 + dt * i as f64).collect()
}

/// `n` log-spaced points on `[a, b]` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.log10(), b.log10());
    linspace(la, lb, n).into_iter().map(|x| 10f64.powf(x)).collect()
}
