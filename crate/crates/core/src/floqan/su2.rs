//! Single spin-1/2 rotations.
use nalgebra::{Complex, Matrix2, Matrix3};

pub type C64 = Complex<f64>;
pub type Su2 = Matrix2<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Spin-1/2 operators S_x, S_y, S_z.
pub fn spin_ops() -> [Su2; 3] {
    let h = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    [
        Matrix2::new(z, h, h, z),
        Matrix2::new(z, -I * 0.5, I * 0.5, z),
        Matrix2::new(h, z, z, -h),
    ]
}

/// `exp(-i angle n.S)` for a unit vector `n`.
pub fn rotation(n: [f64; 3], angle: f64) -> Su2 {
    let (s, c) = (angle / 2.0).sin_cos();
    let (nx, ny, nz) = (n[0], n[1], n[2]);
    Matrix2::new(
        C64::new(c, -s * nz),
        C64::new(-s * ny, -s * nx),
        C64::new(s * ny, -s * nx),
        C64::new(c, s * nz),
    )
}

/// `exp(-i (wx S_x + wz S_z) t)`.
pub fn precession(wx: f64, wz: f64, t: f64) -> Su2 {
    let w = wx.hypot(wz);
    if w == 0.0 {
        return Su2::identity();
    }
    rotation([wx / w, 0.0, wz / w], w * t)
}

/// SO(3) image: `U S_j U^dagger = sum_i R_ij S_i`.
pub fn so3(u: &Su2) -> Matrix3<f64> {
    let s = spin_ops();
    let ud = u.adjoint();
    Matrix3::from_fn(|i, j| 2.0 * (s[i] * u * s[j] * ud).trace().re)
}

/// Rotation angle in [0, pi] and unit axis (the sign of `U` is immaterial).
pub fn axis_angle(u: &Su2) -> (f64, [f64; 3]) {
    let mut u = *u;
    if u.trace().re < 0.0 {
        u = -u;
    }
    let c = (u.trace().re / 2.0).clamp(-1.0, 1.0);
    let chi = 2.0 * c.acos();
    let s = spin_ops();
    // sin(chi/2) n_k = Re(i tr(U sigma_k)) / 2 with sigma = 2S
    let v: Vec<f64> = s.iter().map(|sk| (I * (u * sk * C64::new(2.0, 0.0)).trace()).re / 2.0).collect();
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (chi, [v[0] / norm, v[1] / norm, v[2] / norm])
}
