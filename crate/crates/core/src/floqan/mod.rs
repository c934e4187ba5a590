//! Semi-analytic relaxation model for a periodically pulsed spin ensemble.
//!
//! One period is a free evolution of length `tau2` followed by a pulse of length `tau1`
//! (drive `omega_x`, offset `omega_z`), so the one-period propagator is
//! `U(T) = exp(-i(wx Ix + wz Iz) tau1) exp(-i wz Iz tau2)`.
//! The propagator is factored as `U(t) = P(t) exp(-i H_eff t)`; the micromotion `P(t)`
//! is expanded in Wigner-D Fourier coefficients which, with a Lorentzian spectral
//! density, give the rates R1' (along the effective axis) and R2' (transverse to it).

mod axis;
mod micromotion;
mod rates;
pub mod su2;
mod wigner;

pub use axis::{effective_axis_closed_form, effective_from_propagator, one_period_propagator, rf_propagator};
pub use micromotion::{euler_zyz, micromotion_euler, rotation_zyz, MicromotionTrajectory};
pub use rates::{
    biexp_signal, fourier_coeffs, lorentzian_j, offset_scan, rates, rates_with_axis, FourierTable, RateResult,
    DEFAULT_K, DEFAULT_SAMPLES,
};
pub use wigner::{wigner_big_d2, wigner_d2, wigner_small_d};

use crate::{Error, Result};
use std::f64::consts::PI;

/// Pulse-sequence parameters: pulse length `tau1` (s), gap `tau2` (s),
/// drive `omega_x` and offset `omega_z` (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceParams {
    pub tau1: f64,
    pub tau2: f64,
    pub omega_x: f64,
    pub omega_z: f64,
}

impl SequenceParams {
    pub fn new(tau1: f64, tau2: f64, omega_x: f64, omega_z: f64) -> Result<Self> {
        let p = SequenceParams { tau1, tau2, omega_x, omega_z };
        p.validate()?;
        Ok(p)
    }

    /// Pulse of length `tau1` with nominal flip angle `flip` (rad), i.e. `omega_x = flip / tau1`.
    pub fn nominal(flip: f64, tau1: f64, tau2: f64, omega_z: f64) -> Result<Self> {
        Self::new(tau1, tau2, flip / tau1, omega_z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0) || !(self.tau2 >= 0.0) || !self.tau1.is_finite() || !self.tau2.is_finite() {
            return Err(Error::invalid("need tau1 > 0 and tau2 >= 0"));
        }
        if !self.omega_x.is_finite() || !self.omega_z.is_finite() {
            return Err(Error::invalid("omega_x and omega_z must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.tau1 + self.tau2
    }

    /// Drive angular frequency `2 pi / T`.
    pub fn big_omega(&self) -> f64 {
        2.0 * PI / self.period()
    }

    pub fn with_offset(&self, omega_z: f64) -> Self {
        SequenceParams { omega_z, ..*self }
    }
}

/// Quantisation axis and rotation rate of the one-period effective Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveAxis {
    pub theta_eff: f64,
    pub phi_eff: f64,
    /// rad/s, signed; `|omega_eff| T <= pi`
    pub omega_eff: f64,
}

impl EffectiveAxis {
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta_eff.sin_cos();
        let (sp, cp) = self.phi_eff.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Representation with `omega_eff >= 0` (flips the axis if needed).
    pub fn canonical(&self) -> Self {
        if self.omega_eff >= 0.0 {
            return *self;
        }
        EffectiveAxis { theta_eff: PI - self.theta_eff, phi_eff: wrap_pi(self.phi_eff + PI), omega_eff: -self.omega_eff }
    }

    /// `|a_0|^2 = (sin theta cos phi)^2`: overlap of the x-polarised start with the axis.
    pub fn a0_sq(&self) -> f64 {
        (self.theta_eff.sin() * self.phi_eff.cos()).powi(2)
    }

    /// `2|a_1|^2 = |cos theta cos phi - i sin phi|^2`: transverse share of the start.
    pub fn a1_sq(&self) -> f64 {
        (self.theta_eff.cos() * self.phi_eff.cos()).powi(2) + self.phi_eff.sin().powi(2)
    }
}

/// Fluctuation statistics: correlation time `tau_c` (s/rad) and second-moment change `delta_m2` ((rad/s)^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxParams {
    pub tau_c: f64,
    pub delta_m2: f64,
}

impl RelaxParams {
    pub fn new(tau_c: f64, delta_m2: f64) -> Result<Self> {
        if !(tau_c > 0.0) || !(delta_m2 >= 0.0) || !tau_c.is_finite() || !delta_m2.is_finite() {
            return Err(Error::invalid("need tau_c > 0 and delta_m2 >= 0"));
        }
        Ok(RelaxParams { tau_c, delta_m2 })
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}
