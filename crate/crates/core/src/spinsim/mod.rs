//! Exact propagation of small dipolar-coupled spin-1/2 clusters under pulsed spin locking.
//!
//! Basis states are bit strings, bit `k` set meaning spin `k` is down. In this basis
//! every Hamiltonian used here is real symmetric, so propagators come from one real
//! eigendecomposition per segment type.

mod cluster;
mod evolve;
mod magnus;
mod ops;
mod scan;

pub use cluster::{dipolar_couplings, random_clusters, SpinCluster, COUPLING_SCALE_13C};
pub use evolve::{evolve_free, evolve_train, evolve_train_modulated, initial_x_state, segment_propagator, FloquetPropagator, SimOptions, SimTrace};
pub use magnus::magnus_zeroth;
pub use ops::{build_hamiltonian, collective_expectations, dipolar_hamiltonian, spin_operator, Axis};
pub use scan::{lifetime_scan, LifetimeEntry, SweepParam};

use crate::{Error, Result};

/// Periodic pulse train `[pulse(t_p) - gap(tau_gap)] x n_pulses`; angular frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseTrain {
    pub t_p: f64,
    pub tau_gap: f64,
    pub omega_x: f64,
    pub delta_omega: f64,
    pub n_pulses: usize,
    /// Acquisition-window placement within the gap (metadata only).
    pub t_acq: f64,
}

impl PulseTrain {
    pub fn new(t_p: f64, tau_gap: f64, omega_x: f64, delta_omega: f64, n_pulses: usize) -> Result<Self> {
        let tr = PulseTrain { t_p, tau_gap, omega_x, delta_omega, n_pulses, t_acq: 0.0 };
        tr.validate()?;
        Ok(tr)
    }

    /// Train whose pulses have nominal flip angle `flip` (rad): `omega_x = flip / t_p`.
    pub fn nominal(flip: f64, t_p: f64, tau_gap: f64, delta_omega: f64, n_pulses: usize) -> Result<Self> {
        Self::new(t_p, tau_gap, flip / t_p, delta_omega, n_pulses)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_p > 0.0) || !(self.tau_gap >= 0.0) || !self.t_p.is_finite() || !self.tau_gap.is_finite() {
            return Err(Error::invalid("pulse train needs t_p > 0 and tau_gap >= 0"));
        }
        if self.n_pulses < 1 {
            return Err(Error::invalid("pulse train needs n_pulses >= 1"));
        }
        if !self.omega_x.is_finite() || !self.delta_omega.is_finite() {
            return Err(Error::invalid("omega_x and delta_omega must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.t_p + self.tau_gap
    }

    /// Nominal flip angle `omega_x t_p` (rad).
    pub fn flip_angle(&self) -> f64 {
        self.omega_x * self.t_p
    }
}
