use crate::series::TimeSeries;
use crate::{Error, Result};

/// Time of the first downward crossing of 1/e, linearly interpolated.
///
/// The trace must start within 1 +/- 0.05; later re-crossings are ignored.
pub fn one_over_e_lifetime(trace: &TimeSeries) -> Result<f64> {
    let (t, v) = (trace.times(), trace.values());
    if (v[0] - 1.0).abs() > 0.05 {
        return Err(Error::NotNormalized(v[0]));
    }
    let level = (-1f64).exp();
    for i in 1..v.len() {
        if v[i] < level {
            let (t0, t1, v0, v1) = (t[i - 1], t[i], v[i - 1], v[i]);
            return Ok(t0 + (v0 - level) * (t1 - t0) / (v0 - v1));
        }
    }
    Err(Error::NoCrossing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linspace;

    #[test]
    fn single_exponential() {
        let ts = TimeSeries::from_fn(linspace(0.0, 500.0, 50_001), |t| (-t / 92.0).exp()).unwrap();
        let l = one_over_e_lifetime(&ts).unwrap();
        assert!((l / 92.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn errors() {
        let ts = TimeSeries::from_fn(linspace(0.0, 1.0, 10), |_| 1.0).unwrap();
        assert!(matches!(one_over_e_lifetime(&ts), Err(Error::NoCrossing)));
        let ts = TimeSeries::from_fn(linspace(0.0, 1.0, 10), |_| 0.5).unwrap();
        assert!(matches!(one_over_e_lifetime(&ts), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn first_crossing_wins() {
        let ts = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0, 0.2, 0.9, 0.1, 0.0]).unwrap();
        let l = one_over_e_lifetime(&ts).unwrap();
        assert!(l < 1.0);
    }
}
