use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::MAX_SPINS;
use crate::{Error, Result};

/// `mu0/(4 pi) gamma^2 hbar / 2` for 13C, in rad nm^3 / s.
pub const COUPLING_SCALE_13C: f64 = 23.87;

/// Spin count, symmetric couplings `b_kl` (rad/s, zero diagonal), optional positions (nm).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinCluster {
    couplings: DMatrix<f64>,
    positions: Option<Vec<[f64; 3]>>,
}

impl SpinCluster {
    pub fn from_couplings(couplings: DMatrix<f64>) -> Result<Self> {
        let n = couplings.nrows();
        if couplings.ncols() != n || n == 0 || n > MAX_SPINS {
            return Err(Error::invalid(format!("coupling matrix must be square with 1..={MAX_SPINS} rows")));
        }
        for k in 0..n {
            if couplings[(k, k)] != 0.0 {
                return Err(Error::invalid("coupling diagonal must be zero"));
            }
            for l in 0..n {
                let (a, b) = (couplings[(k, l)], couplings[(l, k)]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid("couplings must be finite and symmetric"));
                }
            }
        }
        Ok(SpinCluster { couplings, positions: None })
    }

    pub fn from_positions(positions: Vec<[f64; 3]>, b_axis: [f64; 3], coupling_scale: f64) -> Result<Self> {
        let b = dipolar_couplings(&positions, b_axis, coupling_scale)?;
        let mut c = Self::from_couplings(b)?;
        c.positions = Some(positions);
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }

    /// Median of `|b_kl|` over pairs (rad/s).
    pub fn median_coupling(&self) -> f64 {
        let n = self.n();
        let mut v: Vec<f64> = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).map(|(k, l)| self.couplings[(k, l)].abs()).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len();
        if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        }
    }

    /// Same cluster with spins relabelled: new spin `i` is old spin `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation"));
        }
        let c = DMatrix::from_fn(n, n, |i, j| self.couplings[(perm[i], perm[j])]);
        let mut out = Self::from_couplings(c)?;
        out.positions = self.positions.as_ref().map(|p| perm.iter().map(|&i| p[i]).collect());
        Ok(out)
    }
}

/// `b_kl = scale (1 - 3 cos^2 theta_kl) / r_kl^3` with `theta_kl` measured from `b_axis`.
pub fn dipolar_couplings(positions: &[[f64; 3]], b_axis: [f64; 3], coupling_scale: f64) -> Result<DMatrix<f64>> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::invalid("need at least 2 positions"));
    }
    let an = (b_axis[0].powi(2) + b_axis[1].powi(2) + b_axis[2].powi(2)).sqrt();
    if !(an > 0.0) {
        return Err(Error::invalid("field axis must be nonzero"));
    }
    let ax = [b_axis[0] / an, b_axis[1] / an, b_axis[2] / an];
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k + 1..n {
            let d = [positions[l][0] - positions[k][0], positions[l][1] - positions[k][1], positions[l][2] - positions[k][2]];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if !(r > 0.0) {
                return Err(Error::invalid(format!("spins {k} and {l} coincide")));
            }
            let c = (d[0] * ax[0] + d[1] * ax[1] + d[2] * ax[2]) / r;
            let v = coupling_scale * (1.0 - 3.0 * c * c) / r.powi(3);
            b[(k, l)] = v;
            b[(l, k)] = v;
        }
    }
    Ok(b)
}

/// `count` random clusters of `n` spins with positions uniform in a cube, rescaled so the
/// median |b_kl| equals `2 pi j_median_hz`. Realisation `i` draws from stream `i` of the seed.
pub fn random_clusters(n: usize, count: usize, j_median_hz: f64, seed: u64) -> Result<Vec<SpinCluster>> {
    if n < 2 || n > MAX_SPINS {
        return Err(Error::invalid(format!("random clusters need 2..={MAX_SPINS} spins")));
    }
    if !(j_median_hz > 0.0) {
        return Err(Error::invalid("median coupling must be positive"));
    }
    let min_sep = 0.35 / (n as f64).cbrt();
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut pos: Vec<[f64; 3]> = Vec::with_capacity(n);
            while pos.len() < n {
                let p = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                let far = pos.iter().all(|q| {
                    let d2: f64 = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum();
                    d2.sqrt() >= min_sep
                });
                if far {
                    pos.push(p);
                }
            }
            let c = SpinCluster::from_positions(pos.clone(), [0.0, 0.0, 1.0], COUPLING_SCALE_13C)?;
            let s = (c.median_coupling() / (2.0 * std::f64::consts::PI * j_median_hz)).cbrt();
            let pos = pos.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
            SpinCluster::from_positions(pos, [0.0, 0.0, 1.0], COUPLING_SCALE_13C)
        })
        .collect()
}
