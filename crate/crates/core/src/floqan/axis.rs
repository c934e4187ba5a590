use std::f64::consts::PI;

use super::su2::{axis_angle, precession, Su2};
use super::{wrap_pi, EffectiveAxis, SequenceParams};
use crate::{Error, Result};

/// Single-spin propagator at time `t` within one period (free gap first, then pulse).
pub fn rf_propagator(p: &SequenceParams, t: f64) -> Su2 {
    if t <= p.tau2 {
        precession(0.0, p.omega_z, t)
    } else {
        precession(p.omega_x, p.omega_z, t - p.tau2) * precession(0.0, p.omega_z, p.tau2)
    }
}

/// `U(T) = exp(-i(wx Ix + wz Iz) tau1) exp(-i wz Iz tau2)`.
pub fn one_period_propagator(p: &SequenceParams) -> Su2 {
    precession(p.omega_x, p.omega_z, p.tau1) * precession(0.0, p.omega_z, p.tau2)
}

const NO_ROTATION_EPS: f64 = 1e-12;

/// Axis from the closed-form composition of the pulse and free rotations.
///
/// `theta = acot(cos(g/2) cot(eta) + cot(psi/2) csc(eta) sin(g/2))`, `phi = -g/2`, with
/// `psi = tau1 sqrt(wx^2 + wz^2)`, `g = tau2 wz`, `eta = atan2(wx, wz)`. The sign of
/// `omega_eff` follows from the same composition written as a quaternion product.
pub fn effective_axis_closed_form(p: &SequenceParams) -> Result<EffectiveAxis> {
    p.validate()?;
    if p.omega_x == 0.0 && p.omega_z == 0.0 {
        return Err(Error::NoRotation);
    }
    let psi = p.tau1 * p.omega_x.hypot(p.omega_z);
    let g = p.tau2 * p.omega_z;
    let eta = p.omega_x.atan2(p.omega_z);
    let (sp, cp) = (psi / 2.0).sin_cos();
    let (sg, cg) = (g / 2.0).sin_cos();
    let (se, ce) = eta.sin_cos();

    let y = sp * se;
    let theta = if y.abs() > 1e-300 {
        let c = cg * ce / se + (cp / sp) * sg / se;
        1f64.atan2(c)
    } else {
        // pulse is a multiple of 2 pi or purely along z: axis is +-z
        let x = sp * ce * cg + cp * sg;
        if x >= 0.0 {
            0.0
        } else {
            PI
        }
    };
    let phi = wrap_pi(-g / 2.0);

    // quaternion of U(T) = q_pulse q_free
    let m = [se, 0.0, ce];
    let u = [sp * m[0], sp * m[1], sp * m[2]];
    let w = [0.0, 0.0, sg];
    let scalar = cp * cg - (u[0] * w[0] + u[1] * w[1] + u[2] * w[2]);
    let cross = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
    let v: Vec<f64> = (0..3).map(|k| cp * w[k] + cg * u[k] + cross[k]).collect();
    let axis = EffectiveAxis { theta_eff: theta, phi_eff: phi, omega_eff: 0.0 };
    let n = axis.unit_vector();
    let s = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
    let mut chi = 2.0 * s.atan2(scalar);
    if chi > PI {
        chi -= 2.0 * PI;
    } else if chi <= -PI {
        chi += 2.0 * PI;
    }
    if chi.abs() < NO_ROTATION_EPS {
        return Err(Error::NoRotation);
    }
    Ok(EffectiveAxis { omega_eff: chi / p.period(), ..axis })
}

/// Axis and angle read off the exact 2x2 one-period propagator; `omega_eff = chi / T >= 0`.
pub fn effective_from_propagator(p: &SequenceParams) -> Result<EffectiveAxis> {
    p.validate()?;
    let (chi, n) = axis_angle(&one_period_propagator(p));
    if chi < NO_ROTATION_EPS {
        return Err(Error::NoRotation);
    }
    Ok(EffectiveAxis {
        theta_eff: n[2].clamp(-1.0, 1.0).acos(),
        phi_eff: if n[0] == 0.0 && n[1] == 0.0 { 0.0 } else { n[1].atan2(n[0]) },
        omega_eff: chi / p.period(),
    })
}
