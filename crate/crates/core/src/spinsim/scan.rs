use rayon::prelude::*;

use super::evolve::{evolve_train, SimOptions, SimTrace};
use super::{PulseTrain, SpinCluster};
use crate::laplace::one_over_e_lifetime;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    TP,
    TauGap,
    DeltaOmega,
    OmegaX,
}

impl SweepParam {
    /// `base` with the parameter set to `v`. The pulse count is rescaled so the observation
    /// window `n_pulses * period` stays that of `base`; censored lifetimes stay comparable.
    pub fn apply(self, base: &PulseTrain, v: f64) -> PulseTrain {
        let mut t = *base;
        match self {
            SweepParam::TP => t.t_p = v,
            SweepParam::TauGap => t.tau_gap = v,
            SweepParam::DeltaOmega => t.delta_omega = v,
            SweepParam::OmegaX => t.omega_x = v,
        }
        let window = base.n_pulses as f64 * base.period();
        if t.period() > 0.0 && t.period().is_finite() {
            t.n_pulses = ((window / t.period()).round() as usize).max(1);
        }
        t
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TP => "t_p",
            SweepParam::TauGap => "tau_gap",
            SweepParam::DeltaOmega => "delta_omega",
            SweepParam::OmegaX => "omega_x",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t_p" => Ok(SweepParam::TP),
            "tau_gap" => Ok(SweepParam::TauGap),
            "delta_omega" => Ok(SweepParam::DeltaOmega),
            "omega_x" => Ok(SweepParam::OmegaX),
            _ => Err(Error::invalid(format!("unknown sweep parameter `{s}` (t_p, tau_gap, delta_omega, omega_x)"))),
        }
    }
}

/// One row of a lifetime scan. A censored lifetime equals the observation window.
#[derive(Clone, Debug)]
pub struct LifetimeEntry {
    pub value: f64,
    pub lifetime: Option<f64>,
    pub censored: bool,
    pub error: Option<String>,
}

fn one_slice(clusters: &[SpinCluster], train: &PulseTrain, opts: &SimOptions) -> Result<(f64, bool)> {
    let traces = clusters.par_iter().map(|c| evolve_train(c, train, opts)).collect::<Result<Vec<SimTrace>>>()?;
    let avg = SimTrace::average(&traces)?;
    let series = avg.mxy_series()?;
    match one_over_e_lifetime(&series) {
        Ok(t) => Ok((t, false)),
        Err(Error::NoCrossing) => Ok((*avg.times.last().unwrap(), true)),
        Err(e) => Err(e),
    }
}

/// 1/e lifetime of the disorder-averaged |m_xy| for each value of `param`.
/// Failures are recorded per row; the scan continues.
pub fn lifetime_scan(
    clusters: &[SpinCluster],
    base: &PulseTrain,
    param: SweepParam,
    values: &[f64],
    opts: &SimOptions,
) -> Result<Vec<LifetimeEntry>> {
    if clusters.is_empty() {
        return Err(Error::invalid("lifetime scan needs at least one cluster"));
    }
    Ok(values
        .par_iter()
        .map(|&v| {
            let train = param.apply(base, v);
            match train.validate().and_then(|_| one_slice(clusters, &train, opts)) {
                Ok((t, censored)) => LifetimeEntry { value: v, lifetime: Some(t), censored, error: None },
                Err(e) => LifetimeEntry { value: v, lifetime: None, censored: false, error: Some(e.to_string()) },
            }
        })
        .collect())
}
