use rayon::prelude::*;
use rustfft::FftPlanner;

use super::micromotion::{micromotion_euler, MicromotionTrajectory};
use super::su2::C64;
use super::wigner::{wigner_big_d2, wigner_d2};
use super::{effective_from_propagator, EffectiveAxis, RelaxParams, SequenceParams};
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 64;
pub const DEFAULT_SAMPLES: usize = 1024;
const MAX_K: usize = 4096;
const TAIL_LIMIT: f64 = 1e-3;

/// Fourier coefficients of the micromotion, `c[m][k]` and `b[n][k]`, both indexed by
/// `(m + 2, k + K)` with `f(t) = sum_k c_k e^{+i k Omega t}`.
#[derive(Clone, Debug)]
pub struct FourierTable {
    pub k_cut: usize,
    pub c: Vec<Vec<C64>>,
    pub b: Vec<Vec<C64>>,
    /// Share of `sum |c_mk|^2` lying beyond `|k| > K`.
    pub tail_fraction: f64,
}

impl FourierTable {
    pub fn b_nk(&self, n: i32, k: i32) -> C64 {
        self.b[(n + 2) as usize][(k + self.k_cut as i32) as usize]
    }

    pub fn c_mk(&self, m: i32, k: i32) -> C64 {
        self.c[(m + 2) as usize][(k + self.k_cut as i32) as usize]
    }

    pub fn energy_b(&self) -> f64 {
        self.b.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn energy_c(&self) -> f64 {
        self.c.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

/// Expands `D^2_{m0}(Lambda_t^{-1})` over one period and rotates into the effective-axis frame,
/// `b_nk = sum_m q_nm c_mk` with `q = D^2(phi_eff, theta_eff, 0)^H`.
pub fn fourier_coeffs(traj: &MicromotionTrajectory, axis: &EffectiveAxis, k_cut: usize) -> Result<FourierTable> {
    let n = traj.euler.len();
    if k_cut < 1 {
        return Err(Error::invalid("harmonic cutoff K must be >= 1"));
    }
    if 2 * k_cut + 1 > n {
        return Err(Error::invalid(format!("K = {k_cut} needs more than {n} samples per period")));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut full = Vec::with_capacity(5);
    for m in -2i32..=2 {
        // D^2_{m0}(Lambda^{-1}) = conj D^2_{0m}(Lambda) = d^2_{0m}(beta) e^{+i m gamma}
        let mut buf: Vec<C64> = traj
            .euler
            .iter()
            .map(|e| C64::from_polar(wigner_d2(e[1])[(2, (m + 2) as usize)], m as f64 * e[2]))
            .collect();
        fft.process(&mut buf);
        for z in buf.iter_mut() {
            *z /= n as f64;
        }
        full.push(buf);
    }
    let idx = |k: i32| if k >= 0 { k as usize } else { (n as i32 + k) as usize };
    let total: f64 = full.iter().flatten().map(|z| z.norm_sqr()).sum();
    let c: Vec<Vec<C64>> =
        full.iter().map(|row| (-(k_cut as i32)..=k_cut as i32).map(|k| row[idx(k)]).collect()).collect();
    let kept: f64 = c.iter().flatten().map(|z| z.norm_sqr()).sum();
    let tail_fraction = if total > 0.0 { ((total - kept) / total).max(0.0) } else { 0.0 };
    if tail_fraction > TAIL_LIMIT {
        return Err(Error::TailEnergy(tail_fraction));
    }
    let q = wigner_big_d2(axis.phi_eff, axis.theta_eff, 0.0).adjoint();
    let width = 2 * k_cut + 1;
    let b = (0..5)
        .map(|ni| (0..width).map(|kk| (0..5).map(|mi| q[(ni, mi)] * c[mi][kk]).sum()).collect())
        .collect();
    Ok(FourierTable { k_cut, c, b, tail_fraction })
}

/// `J(w) = tau_c / (1 + (w tau_c)^2)`.
pub fn lorentzian_j(omega: f64, tau_c: f64) -> f64 {
    tau_c / (1.0 + (omega * tau_c).powi(2))
}

/// Relaxation rates and mode weights at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateResult {
    /// 1/s
    pub r1p: f64,
    /// 1/s
    pub r2p: f64,
    pub a0_sq: f64,
    pub a1_sq: f64,
    pub axis: EffectiveAxis,
    /// Harmonic cutoff actually used after adaptive doubling.
    pub k_used: usize,
}

/// R1' and R2' with the axis taken from the exact propagator. `k_cut` doubles until the
/// Fourier tail holds less than 1e-3 of the energy.
pub fn rates(p: &SequenceParams, relax: &RelaxParams, k_cut: usize) -> Result<RateResult> {
    let axis = effective_from_propagator(p)?;
    rates_with_axis(p, &axis, relax, k_cut)
}

/// As [`rates`], but with a caller-supplied representation of the effective axis
/// (e.g. the flipped one with negative `omega_eff`).
pub fn rates_with_axis(p: &SequenceParams, axis: &EffectiveAxis, relax: &RelaxParams, k_cut: usize) -> Result<RateResult> {
    let mut k = k_cut.max(1);
    loop {
        let samples = DEFAULT_SAMPLES.max((4 * k).next_power_of_two());
        let traj = micromotion_euler(p, samples)?;
        match fourier_coeffs(&traj, axis, k) {
            Ok(tab) => return Ok(rates_from_table(p, axis, relax, &tab)),
            Err(Error::TailEnergy(_)) if k < MAX_K => k *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn rates_from_table(p: &SequenceParams, axis: &EffectiveAxis, relax: &RelaxParams, tab: &FourierTable) -> RateResult {
    let big_omega = p.big_omega();
    let kc = tab.k_cut as i32;
    let (mut s1, mut s2) = (0.0, 0.0);
    for n in -2i32..=2 {
        let row = &tab.b[(n + 2) as usize];
        let s: f64 = (-kc..=kc)
            .map(|k| {
                let w = n as f64 * axis.omega_eff + k as f64 * big_omega;
                row[(k + kc) as usize].norm_sqr() * lorentzian_j(w, relax.tau_c)
            })
            .sum();
        s1 += (n * n) as f64 * s;
        s2 += (6 - n * n) as f64 * s;
    }
    RateResult {
        r1p: relax.delta_m2 / 4.0 * s1,
        r2p: relax.delta_m2 / 8.0 * s2,
        a0_sq: axis.a0_sq(),
        a1_sq: axis.a1_sq(),
        axis: *axis,
        k_used: tab.k_cut,
    }
}

/// `s(t) = 2|a_1|^2 e^{-R2' t} + |a_0|^2 e^{-R1' t}`.
pub fn biexp_signal(rr: &RateResult, times: &[f64]) -> Result<TimeSeries> {
    let values = times.iter().map(|&t| rr.a1_sq * (-rr.r2p * t).exp() + rr.a0_sq * (-rr.r1p * t).exp()).collect();
    TimeSeries::new(times.to_vec(), values)
}

/// [`rates`] at each offset (rad/s); slices run in parallel, output in input order.
pub fn offset_scan(base: &SequenceParams, offsets: &[f64], relax: &RelaxParams, k_cut: usize) -> Result<Vec<RateResult>> {
    if offsets.len() < 2 {
        return Err(Error::invalid("offset scan needs at least 2 offsets"));
    }
    offsets
        .par_iter()
        .map(|&wz| {
            rates(&base.with_offset(wz), relax, k_cut)
                .map_err(|e| e.in_slice(format!("offset_hz={}", wz / (2.0 * std::f64::consts::PI))))
        })
        .collect()
}
