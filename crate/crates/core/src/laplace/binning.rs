use crate::series::TimeSeries;
use crate::{Error, Result};

/// Bin key: linear bins below `t_floor` sort before log bins above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Lin(i64),
    Log(i64),
}

#[derive(Clone, Copy, Debug, Default)]
struct Acc {
    n: u64,
    sum_t: f64,
    sum_v: f64,
    // squared first differences between consecutive samples of the same bin
    sum_d2: f64,
    n_d: u64,
    last_v: f64,
}

/// Streaming log-binner. Samples must arrive in strictly increasing time order.
///
/// Above `t_floor` the bin index is `floor(bpd * log10(t / t_floor))`; below it
/// samples fall into linear bins of width `t_floor * (10^(1/bpd) - 1)`, the width
/// of the first log bin. Each output point is the mean time and mean value of its bin.
#[derive(Clone, Debug)]
pub struct LogBinner {
    bpd: f64,
    t_floor: f64,
    lin_width: f64,
    cur: Option<(Key, Acc)>,
    done: Vec<Acc>,
    last_t: f64,
}

impl LogBinner {
    pub fn new(bins_per_decade: f64, t_floor: f64) -> Result<Self> {
        if !(bins_per_decade >= 1.0) || !bins_per_decade.is_finite() {
            return Err(Error::invalid("bins_per_decade must be >= 1"));
        }
        if !(t_floor > 0.0) || !t_floor.is_finite() {
            return Err(Error::invalid("t_floor must be > 0"));
        }
        let lin_width = t_floor * (10f64.powf(1.0 / bins_per_decade) - 1.0);
        Ok(LogBinner { bpd: bins_per_decade, t_floor, lin_width, cur: None, done: Vec::new(), last_t: f64::NEG_INFINITY })
    }

    fn key(&self, t: f64) -> Key {
        if t < self.t_floor {
            Key::Lin((t / self.lin_width).floor() as i64)
        } else {
            Key::Log((self.bpd * (t / self.t_floor).log10()).floor() as i64)
        }
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if !(t > self.last_t) || t < 0.0 {
            return Err(Error::invalid("binner input times must be >= 0 and strictly increasing"));
        }
        if !v.is_finite() {
            return Err(Error::invalid("non-finite sample value"));
        }
        self.last_t = t;
        let k = self.key(t);
        match &mut self.cur {
            Some((ck, acc)) if *ck == k => {
                let d = v - acc.last_v;
                acc.sum_d2 += d * d;
                acc.n_d += 1;
                acc.n += 1;
                acc.sum_t += t;
                acc.sum_v += v;
                acc.last_v = v;
            }
            _ => {
                if let Some((_, acc)) = self.cur.take() {
                    self.done.push(acc);
                }
                self.cur = Some((k, Acc { n: 1, sum_t: t, sum_v: v, sum_d2: 0.0, n_d: 0, last_v: v }));
            }
        }
        Ok(())
    }

    /// Number of nonempty bins so far.
    pub fn bins(&self) -> usize {
        self.done.len() + self.cur.is_some() as usize
    }

    /// Median over bins of the within-bin first-difference variance / 2, as a noise sigma.
    fn noise_estimate(bins: &[Acc]) -> Option<f64> {
        let mut v: Vec<f64> = bins.iter().filter(|a| a.n_d >= 4).map(|a| a.sum_d2 / a.n_d as f64 / 2.0).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(v[v.len() / 2].sqrt())
    }

    /// Emits the binned trace. Fails if fewer than 10 bins are nonempty.
    pub fn finish(mut self) -> Result<TimeSeries> {
        if let Some((_, acc)) = self.cur.take() {
            self.done.push(acc);
        }
        if self.done.len() < 10 {
            return Err(Error::TooFewBins(self.done.len()));
        }
        let times = self.done.iter().map(|a| a.sum_t / a.n as f64).collect();
        let values = self.done.iter().map(|a| a.sum_v / a.n as f64).collect();
        let counts = self.done.iter().map(|a| a.n).collect();
        let mut ts = TimeSeries::with_counts(times, values, counts)?;
        if let Some(s) = Self::noise_estimate(&self.done) {
            ts.meta_mut().insert("noise_sigma_est".into(), format!("{s:e}"));
        }
        ts.meta_mut().insert("bins_per_decade".into(), self.bpd.to_string());
        ts.meta_mut().insert("t_floor_s".into(), self.t_floor.to_string());
        Ok(ts)
    }
}

/// Log-bins a trace (see [`LogBinner`]). Bin populations go to `counts()`;
/// the input's meta is carried over.
pub fn log_bin(trace: &TimeSeries, bins_per_decade: f64, t_floor: f64) -> Result<TimeSeries> {
    let t_last = *trace.times().last().unwrap();
    if !(t_floor < t_last) {
        return Err(Error::invalid("t_floor must be below the last sample time"));
    }
    if trace.counts().is_some() {
        return Err(Error::invalid("trace is already binned"));
    }
    let mut b = LogBinner::new(bins_per_decade, t_floor)?;
    for (&t, &v) in trace.times().iter().zip(trace.values()) {
        b.push(t, v)?;
    }
    let mut out = b.finish()?;
    for (k, v) in trace.meta() {
        out.meta_mut().entry(k.clone()).or_insert_with(|| v.clone());
    }
    Ok(out)
}
