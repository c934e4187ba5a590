//! Numerical toolkit for driven dipolar spin ensembles.
//!
//! * [`laplace`]: regularised nonnegative Laplace inversion of long decay traces.
//! * [`floqan`]: semi-analytic Floquet relaxation model (effective axis, micromotion, R1'/R2').
//! * [`spinsim`]: exact propagation of small dipolar clusters under pulsed spin locking.
//! * [`siggen`]: synthetic decays, noise and AC-sensing signals.
//!
//! The shared data types live at the crate root.

pub mod error;
pub mod floqan;
pub mod laplace;
pub mod series;
pub mod siggen;
pub mod spinsim;

pub use error::{Error, Result};
pub use floqan::{EffectiveAxis, FourierTable, MicromotionTrajectory, RateResult, RelaxParams, SequenceParams};
pub use laplace::{KernelMatrix, LIMap, Peak, Spectrum, T2Grid};
pub use series::TimeSeries;
pub use siggen::{ACField, DecayModel};
pub use spinsim::{PulseTrain, SimTrace, SpinCluster};
