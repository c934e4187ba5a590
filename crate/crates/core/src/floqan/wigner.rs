use nalgebra::{Matrix5, SMatrix};

use super::su2::C64;

fn fact(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Reduced Wigner matrix `d^j_{m'm}(beta)` for integer `j = (D - 1) / 2`, rows `m' = -j..j`, columns `m = -j..j`.
pub fn wigner_small_d<const D: usize>(beta: f64) -> SMatrix<f64, D, D> {
    let j = (D as i32 - 1) / 2;
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    SMatrix::from_fn(|a, b| {
        let (mp, m) = (a as i32 - j, b as i32 - j);
        let pre = (fact(j + mp) * fact(j - mp) * fact(j + m) * fact(j - m)).sqrt();
        let kmin = 0.max(m - mp);
        let kmax = (j + m).min(j - mp);
        let mut sum = 0.0;
        for k in kmin..=kmax {
            let sign = if (mp - m + k) % 2 == 0 { 1.0 } else { -1.0 };
            let den = fact(j + m - k) * fact(k) * fact(mp - m + k) * fact(j - mp - k);
            sum += sign * c.powi(2 * j + m - mp - 2 * k) * s.powi(mp - m + 2 * k) / den;
        }
        pre * sum
    })
}

/// Rank-2 reduced rotation matrix, indexed by `m + 2`.
pub fn wigner_d2(beta: f64) -> Matrix5<f64> {
    wigner_small_d::<5>(beta)
}

/// `D^2_{m'm}(alpha, beta, gamma) = e^{-i m' alpha} d^2_{m'm}(beta) e^{-i m gamma}`.
pub fn wigner_big_d2(alpha: f64, beta: f64, gamma: f64) -> Matrix5<C64> {
    let d = wigner_d2(beta);
    Matrix5::from_fn(|a, b| {
        let (mp, m) = (a as f64 - 2.0, b as f64 - 2.0);
        C64::from_polar(d[(a, b)], -mp * alpha - m * gamma)
    })
}
