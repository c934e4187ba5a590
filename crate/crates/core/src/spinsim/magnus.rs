use nalgebra::{DMatrix, Matrix3};

use super::ops::{C64, MAX_SPINS};
use super::{PulseTrain, SpinCluster};
use crate::floqan::su2::{precession, so3};
use crate::{Error, Result};

/// `S^a_k |s> = coef |s'>` for a single spin operator.
fn apply(a: usize, k: usize, s: usize) -> (C64, usize) {
    let up = s >> k & 1 == 0;
    match a {
        0 => (C64::new(0.5, 0.0), s ^ (1 << k)),
        1 => (C64::new(0.0, if up { 0.5 } else { -0.5 }), s ^ (1 << k)),
        _ => (C64::new(if up { 0.5 } else { -0.5 }, 0.0), s),
    }
}

/// Period average of the toggling-frame dipolar Hamiltonian,
/// `H = (1/T) int_0^T U_rf^dagger(t) H_dd U_rf(t) dt`, with `U_rf` the collective
/// drive + offset rotation (pulse first, then gap).
///
/// `U_rf^dagger I_kz U_rf = sum_a r_a(t) I_ka`, so only the 3x3 average of `r_a r_b`
/// needs quadrature (composite Simpson, step <= t_p / 100).
pub fn magnus_zeroth(cluster: &SpinCluster, train: &PulseTrain) -> Result<DMatrix<C64>> {
    train.validate()?;
    let n = cluster.n();
    if n > MAX_SPINS {
        return Err(Error::invalid("too many spins"));
    }
    let t_per = train.period();
    let u_pulse_end = precession(train.omega_x, train.delta_omega, train.t_p);
    let r_at = |t: f64| {
        let u = if t <= train.t_p {
            precession(train.omega_x, train.delta_omega, t)
        } else {
            precession(0.0, train.delta_omega, t - train.t_p) * u_pulse_end
        };
        let r = so3(&u).row(2).transpose();
        r * r.transpose()
    };
    let simpson = |a: f64, b: f64| -> Matrix3<f64> {
        if b <= a {
            return Matrix3::zeros();
        }
        let mut m = (((b - a) / (train.t_p / 100.0)).ceil() as usize).max(2);
        m += m % 2;
        let h = (b - a) / m as f64;
        let mut acc = r_at(a) + r_at(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += r_at(a + h * i as f64) * w;
        }
        acc * (h / 3.0)
    };
    let mavg = (simpson(0.0, train.t_p) + simpson(train.t_p, t_per)) / t_per;

    let d = 1usize << n;
    let b = cluster.couplings();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for k in 0..n {
        for l in k + 1..n {
            let bkl = b[(k, l)];
            if bkl == 0.0 {
                continue;
            }
            for aa in 0..3 {
                for bb in 0..3 {
                    let mut coef = 3.0 * mavg[(aa, bb)];
                    if aa == bb {
                        coef -= 1.0;
                    }
                    if coef == 0.0 {
                        continue;
                    }
                    for s in 0..d {
                        let (c1, s1) = apply(bb, l, s);
                        let (c2, s2) = apply(aa, k, s1);
                        h[(s2, s)] += c1 * c2 * (bkl * coef);
                    }
                }
            }
        }
    }
    Ok(h)
}
