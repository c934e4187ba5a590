use std::path::PathBuf;

use prethermal::floqan::{effective_axis_closed_form, effective_from_propagator, offset_scan, rates, wrap_pi, DEFAULT_K};
use prethermal::{RateResult, RelaxParams, SequenceParams};
use serde::{Deserialize, Serialize};

use super::{out_dir, require, write_svg, TWO_PI};
use crate::output::{num, write_csv};
use crate::svg::{stacked, Panel, Scale, Series};
use crate::{CliError, Globals};

pub const HEADER: [&str; 8] =
    ["offset_hz", "theta_eff_deg", "phi_eff_deg", "omega_eff_hz", "a0_sq", "a1_sq", "r1p_per_s", "r2p_per_s"];

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Pulse length in s
    #[arg(long)]
    pub tau1_s: Option<f64>,
    /// Free evolution between pulses in s
    #[arg(long)]
    pub tau2_s: Option<f64>,
    /// Drive strength omega_x / 2 pi in Hz [default: a nominal 90 deg pulse, 1 / (4 tau1)]
    #[arg(long)]
    pub omega_x_hz: Option<f64>,
    /// Resonance offsets in Hz, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default)]
    pub offsets_hz: Vec<f64>,
    /// Evenly spaced offsets `start:stop:count` in Hz, used when no list is given
    #[arg(long, allow_hyphen_values = true)]
    pub offset_range: Option<String>,
    /// Correlation time of the dipolar fluctuations [default: 200e-6]
    #[arg(long)]
    pub tau_c_s_per_rad: Option<f64>,
    /// Second-moment change in (rad/s)^2 [default: 2 pi x 100]
    #[arg(long)]
    pub delta_m2_rad2ps2: Option<f64>,
    /// Initial harmonic cutoff (doubled until converged)
    #[arg(long = "k")]
    #[serde(rename = "K")]
    pub k: Option<usize>,
    /// Also compute the axis in closed form and report its deviation from the propagator axis
    #[arg(long)]
    #[serde(default)]
    pub check_axis: bool,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
}

fn offsets(a: &Args) -> Result<Vec<f64>, CliError> {
    if !a.offsets_hz.is_empty() {
        return Ok(a.offsets_hz.clone());
    }
    let spec = require(&a.offset_range, "offsets_hz or offset_range")?;
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::parse(format!("offset_range `{spec}` is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let (s, e) = (parts[0].parse::<f64>().map_err(|_| bad())?, parts[1].parse::<f64>().map_err(|_| bad())?);
    let n = parts[2].parse::<usize>().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok(prethermal::series::linspace(s, e, n))
}

/// Largest angle between the closed-form and propagator axes, or NaN when the rotation angle
/// is 0 or pi and the axis is not defined.
fn axis_deviation(p: &SequenceParams) -> Result<(f64, f64, f64), CliError> {
    let b = effective_from_propagator(p)?.canonical();
    let chi = b.omega_eff * p.period();
    if !(chi > 1e-6 && chi < std::f64::consts::PI - 1e-6) {
        return Ok((f64::NAN, f64::NAN, f64::NAN));
    }
    let c = effective_axis_closed_form(p)?.canonical();
    let dphi = if c.theta_eff.sin() < 1e-6 { 0.0 } else { wrap_pi(c.phi_eff - b.phi_eff).abs() };
    Ok((c.theta_eff.to_degrees(), c.phi_eff.to_degrees(), (c.theta_eff - b.theta_eff).abs().max(dphi)))
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let tau1 = require(&a.tau1_s, "tau1_s")?;
    let tau2 = require(&a.tau2_s, "tau2_s")?;
    let wx = a.omega_x_hz.map(|f| TWO_PI * f).unwrap_or(std::f64::consts::FRAC_PI_2 / tau1);
    let base = SequenceParams::new(tau1, tau2, wx, 0.0)?;
    let relax = RelaxParams::new(a.tau_c_s_per_rad.unwrap_or(200e-6), a.delta_m2_rad2ps2.unwrap_or(TWO_PI * 100.0))?;
    let k = a.k.unwrap_or(DEFAULT_K);
    let offs = offsets(&a)?;
    let dir = out_dir(&a.out_dir)?;

    let omegas: Vec<f64> = offs.iter().map(|f| TWO_PI * f).collect();
    let res: Vec<RateResult> = if omegas.len() == 1 {
        vec![rates(&base.with_offset(omegas[0]), &relax, k).map_err(|e| CliError::from(e).annotate(format!("offset_hz={}", offs[0])))?]
    } else {
        offset_scan(&base, &omegas, &relax, k)?
    };

    let mut header: Vec<&str> = HEADER.to_vec();
    let mut checks = Vec::new();
    if a.check_axis {
        header.extend(["theta_eff_cf_deg", "phi_eff_cf_deg", "axis_dev_rad"]);
        for &w in &omegas {
            checks.push(axis_deviation(&base.with_offset(w))?);
        }
    }
    let rows = res.iter().enumerate().map(|(i, r)| {
        let mut row = vec![
            num(offs[i]),
            num(r.axis.theta_eff.to_degrees()),
            num(r.axis.phi_eff.to_degrees()),
            num(r.axis.omega_eff / TWO_PI),
            num(r.a0_sq),
            num(r.a1_sq),
            num(r.r1p),
            num(r.r2p),
        ];
        if let Some(c) = checks.get(i) {
            row.extend([num(c.0), num(c.1), num(c.2)]);
        }
        row
    });
    write_csv(&dir.join("rates.csv"), &header, rows)?;

    if g.svg {
        let x: Vec<f64> = offs.iter().map(|f| f / 1e3).collect();
        let series = |label: &str, f: &dyn Fn(&RateResult) -> f64| Series::new(label, x.iter().cloned().zip(res.iter().map(f)).collect());
        let top = Panel {
            title: "relaxation times".into(),
            x_label: "offset (kHz)".into(),
            y_label: "time (s)".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            series: vec![series("1/R1'", &|r| 1.0 / r.r1p), series("1/R2'", &|r| 1.0 / r.r2p)],
        };
        let bottom = Panel {
            title: "mode weights".into(),
            x_label: "offset (kHz)".into(),
            y_label: "weight".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: vec![series("|a0|^2", &|r| r.a0_sq), series("|a1|^2", &|r| r.a1_sq)],
        };
        write_svg(&dir.join("rates.svg"), &stacked(&[top, bottom]))?;
    }

    if let Some((i, r)) = res.iter().enumerate().max_by(|x, y| x.1.r2p.total_cmp(&y.1.r2p).reverse()) {
        println!(
            "{} offsets; longest 1/R2' = {:.4e} s at {} Hz (theta_eff {:.2} deg)",
            res.len(),
            1.0 / r.r2p,
            offs[i],
            r.axis.theta_eff.to_degrees()
        );
    }
    if a.check_axis {
        let worst = checks.iter().map(|c| c.2).filter(|d| d.is_finite()).fold(0.0, f64::max);
        let skipped = checks.iter().filter(|c| c.2.is_nan()).count();
        println!("axis check: max deviation {worst:.3e} rad ({skipped} offsets without a defined axis)");
        if worst > 1e-6 {
            return Err(CliError::solver(format!("closed-form and propagator axes differ by {worst:.3e} rad")));
        }
    }
    Ok(())
}
