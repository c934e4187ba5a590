use nalgebra::Matrix3;


use super::axis::{effective_from_propagator, rf_propagator};
use super::su2::{rotation, so3};
use super::SequenceParams;
use crate::{Error, Result};

/// Micromotion `P(t) = U_rf(t) exp(+i H_eff t)` sampled on a uniform grid over `[0, T)`,
/// stored as ZYZ Euler angles of its SO(3) image.
#[derive(Clone, Debug)]
pub struct MicromotionTrajectory {
    pub period: f64,
    pub times: Vec<f64>,
    /// `(alpha, beta, gamma)` with `R = Rz(alpha) Ry(beta) Rz(gamma)`
    pub euler: Vec<[f64; 3]>,
    /// Largest deviation between the Euler reconstruction and the propagator.
    pub max_reconstruction_error: f64,
    /// Deviation of `P(T)` from the identity.
    pub periodicity_error: f64,
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn ry(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotation_zyz(e: [f64; 3]) -> Matrix3<f64> {
    rz(e[0]) * ry(e[1]) * rz(e[2])
}

/// ZYZ Euler angles; at gimbal lock (`sin beta < 1e-9`) `gamma = 0` and the rotation folds into `alpha`.
pub fn euler_zyz(r: &Matrix3<f64>) -> [f64; 3] {
    // same as acos(R22) but accurate near 0 and pi
    let beta = r[(0, 2)].hypot(r[(1, 2)]).atan2(r[(2, 2)]);
    if beta.sin() < 1e-9 {
        let alpha = if r[(2, 2)] > 0.0 { r[(1, 0)].atan2(r[(0, 0)]) } else { (-r[(1, 0)]).atan2(-r[(0, 0)]) };
        return [alpha, beta, 0.0];
    }
    [r[(1, 2)].atan2(r[(0, 2)]), beta, r[(2, 1)].atan2(-r[(2, 0)])]
}

fn unwrap(prev: f64, x: f64) -> f64 {
    prev + super::wrap_pi(x - prev)
}

pub fn micromotion_euler(p: &SequenceParams, samples_per_period: usize) -> Result<MicromotionTrajectory> {
    if samples_per_period < 64 {
        return Err(Error::invalid("need at least 64 samples per period"));
    }
    let t_per = p.period();
    let heff = match effective_from_propagator(p) {
        Ok(a) => Some((a.unit_vector(), a.omega_eff)),
        // U(T) = +-1: H_eff = 0 and P(t) = U_rf(t)
        Err(Error::NoRotation) => None,
        Err(e) => return Err(e),
    };
    let pmat = |t: f64| {
        let u = rf_propagator(p, t);
        match heff {
            Some((n, w)) => u * rotation(n, -w * t),
            None => u,
        }
    };
    let mut times = Vec::with_capacity(samples_per_period);
    let mut euler: Vec<[f64; 3]> = Vec::with_capacity(samples_per_period);
    let mut max_err: f64 = 0.0;
    for i in 0..samples_per_period {
        let t = t_per * i as f64 / samples_per_period as f64;
        let r = so3(&pmat(t));
        let mut e = euler_zyz(&r);
        max_err = max_err.max((rotation_zyz(e) - r).abs().max());
        if let Some(prev) = euler.last() {
            e[0] = unwrap(prev[0], e[0]);
            e[2] = unwrap(prev[2], e[2]);
        }
        times.push(t);
        euler.push(e);
    }
    let periodicity_error = (so3(&pmat(t_per)) - Matrix3::identity()).abs().max();
    if max_err > 1e-6 {
        return Err(Error::Reconstruction(max_err));
    }
    if periodicity_error > 1e-6 {
        return Err(Error::Reconstruction(periodicity_error));
    }
    Ok(MicromotionTrajectory { period: t_per, times, euler, max_reconstruction_error: max_err, periodicity_error })
}
