use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::floqan::EffectiveAxis;
use crate::series::TimeSeries;
use crate::{Error, Result};

/// `B(t) = b_ac cos(2 pi f_ac t + phase)`, with `b_ac` in tesla.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ACField {
    pub b_ac: f64,
    pub f_ac: f64,
    pub phase: f64,
}

impl ACField {
    pub fn new(b_ac: f64, f_ac: f64, phase: f64) -> Result<Self> {
        if !(b_ac >= 0.0) || !b_ac.is_finite() {
            return Err(Error::invalid("b_ac must be finite and >= 0"));
        }
        if !(f_ac > 0.0) || !f_ac.is_finite() {
            return Err(Error::invalid("f_ac must be finite and > 0"));
        }
        if !phase.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        Ok(ACField { b_ac, f_ac, phase })
    }
}

/// Multiplies the carrier by `1 + m1 cos(wt + phi) + m2 cos(2wt + 2phi)` with
/// `m1 = g b sin(theta) cos(theta)` and `m2 = g b sin^2(theta) / 2`.
///
/// This is a phenomenological harmonic-weight model: the field modulates the
/// locking-axis tilt, so the first harmonic needs a tilted axis and the second
/// dominates when the axis lies in the transverse plane.
pub fn ac_imprint(carrier: &TimeSeries, field: &ACField, axis: &EffectiveAxis, gain: f64) -> Result<TimeSeries> {
    ACField::new(field.b_ac, field.f_ac, field.phase)?;
    if !gain.is_finite() {
        return Err(Error::invalid("gain must be finite"));
    }
    let (s, c) = axis.theta_eff.sin_cos();
    let m1 = gain * field.b_ac * s * c;
    let m2 = gain * field.b_ac * s * s / 2.0;
    let w = 2.0 * PI * field.f_ac;
    carrier.map_values(|t, v| {
        let ph = w * t + field.phase;
        v * (1.0 + m1 * ph.cos() + m2 * (2.0 * ph).cos())
    })
}

/// Centered moving mean spanning `len` samples (fractional ends get half weight when `len`
/// is even, so a tone with an integer number of periods in `len` samples is removed exactly).
/// Windows are truncated at the edges.
pub fn moving_mean(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    let mut pre = vec![0.0; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + x[i];
    }
    let sum = |a: usize, b: usize| pre[b] - pre[a];
    let half = len / 2;
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(half), (i + half + 1).min(n));
            if len % 2 == 1 || a == 0 || b == n || half == 0 {
                sum(a, b) / (b - a) as f64
            } else {
                (sum(a + 1, b - 1) + 0.5 * (x[a] + x[b - 1])) / len as f64
            }
        })
        .collect()
}

/// Detrended samples inside `window`, plus the sample spacing.
fn detrended(trace: &TimeSeries, f_ac: f64, window: (f64, f64)) -> Result<(Vec<f64>, f64)> {
    let (t0, t1) = window;
    if !(f_ac > 0.0) || !f_ac.is_finite() {
        return Err(Error::invalid("f_ac must be finite and > 0"));
    }
    if !(t1 - t0 >= 2.0 / f_ac) {
        return Err(Error::WindowTooShort(format!("window [{t0}, {t1}] s is shorter than 2/f_ac = {} s", 2.0 / f_ac)));
    }
    let ts = trace.times();
    if t0 < ts[0] || t1 > *ts.last().unwrap() {
        return Err(Error::invalid(format!("window [{t0}, {t1}] s lies outside the trace [{}, {}] s", ts[0], ts.last().unwrap())));
    }
    let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    if ts.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::invalid("sensing analysis needs uniformly sampled traces"));
    }
    // mean over 5 AC periods around each point; uses samples outside the window when present
    let width = ((5.0 / (f_ac * dt)).round() as usize).max(1);
    let a = ts.partition_point(|&t| t < t0);
    let b = ts.partition_point(|&t| t < t1);
    if b - a < 4 {
        return Err(Error::WindowTooShort(format!("window [{t0}, {t1}] s holds {} samples", b - a)));
    }
    let lo = a.saturating_sub(width / 2);
    let hi = (b + width / 2).min(ts.len());
    let v = &trace.values()[lo..hi];
    let trend = moving_mean(v, width);
    let x = (a..b).map(|i| v[i - lo] - trend[i - lo]).collect();
    Ok((x, dt))
}

fn bin_of(f: f64, n: usize, dt: f64) -> usize {
    (f * n as f64 * dt).round() as usize
}

fn dft_mag(x: &[f64], k: usize) -> f64 {
    let n = x.len() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        acc += Complex64::from_polar(v, -2.0 * PI * (k * i) as f64 / n);
    }
    acc.norm()
}

/// Sum of the detrended DFT magnitudes at the bins nearest `f_ac` and `2 f_ac` in `window`.
///
/// Raw DFT convention: a tone of amplitude A over an integer number of periods gives A·N/2.
pub fn integrated_signal(trace: &TimeSeries, f_ac: f64, window: (f64, f64)) -> Result<f64> {
    let (x, dt) = detrended(trace, f_ac, window)?;
    let n = x.len();
    let (k1, k2) = (bin_of(f_ac, n, dt), bin_of(2.0 * f_ac, n, dt));
    let mut s = 0.0;
    for k in [k1, k2] {
        if k > 0 && k <= n / 2 {
            s += dft_mag(&x, k);
        }
    }
    Ok(s)
}

/// Matched-bin magnitude (larger of the `f_ac` and `2 f_ac` bins) over the median magnitude of
/// the other positive-frequency bins, excluding DC and the matched bins with their neighbours.
pub fn snr_window(trace: &TimeSeries, f_ac: f64, window: (f64, f64)) -> Result<f64> {
    let (x, dt) = detrended(trace, f_ac, window)?;
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let matched: Vec<usize> = [bin_of(f_ac, n, dt), bin_of(2.0 * f_ac, n, dt)].into_iter().filter(|&k| k <= half).collect();
    if matched.is_empty() {
        return Err(Error::invalid("f_ac lies above the Nyquist frequency"));
    }
    let sig = matched.iter().map(|&k| buf[k].norm()).fold(0.0, f64::max);
    let mut off: Vec<f64> = (1..=half).filter(|k| matched.iter().all(|&m| k.abs_diff(m) > 1)).map(|k| buf[k].norm()).collect();
    if off.is_empty() {
        return Err(Error::WindowTooShort("no off-signal bins left in the window".into()));
    }
    off.sort_by(f64::total_cmp);
    let med = off[off.len() / 2];
    Ok(if med > 0.0 { sig / med } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linspace;

    fn tone(a: f64, f: f64, fs: f64, secs: f64) -> TimeSeries {
        let n = (fs * secs) as usize;
        TimeSeries::from_fn(linspace(0.0, (n - 1) as f64 / fs, n), |t| 1.0 + a * (2.0 * PI * f * t).cos()).unwrap()
    }

    #[test]
    fn moving_mean_removes_integer_period_tones() {
        let x: Vec<f64> = (0..400).map(|i| 0.01 * i as f64 + (2.0 * PI * i as f64 / 40.0).cos()).collect();
        for len in [200, 201] {
            let m = moving_mean(&x, len);
            let tol = if len == 200 { 1e-12 } else { 0.01 };
            for i in 120..280 {
                assert!((m[i] - 0.01 * i as f64).abs() < tol, "{len} {i} {}", m[i]);
            }
        }
    }

    #[test]
    fn tone_gives_half_n_amplitude() {
        let ts = tone(0.01, 50.0, 2000.0, 4.0);
        let s = integrated_signal(&ts, 50.0, (1.0, 2.0)).unwrap();
        // 2000 samples in the window
        assert!((s / (0.01 * 1000.0) - 1.0).abs() < 0.02, "{s}");
    }

    #[test]
    fn short_window_rejected() {
        let ts = tone(0.01, 50.0, 2000.0, 4.0);
        assert!(matches!(integrated_signal(&ts, 50.0, (1.0, 1.03)), Err(Error::WindowTooShort(_))));
        assert!(snr_window(&ts, 50.0, (3.5, 4.5)).is_err());
    }
}
