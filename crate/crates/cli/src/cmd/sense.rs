use std::path::PathBuf;

use prethermal::floqan::effective_from_propagator;
use prethermal::laplace::io::write_trace_csv;
use prethermal::series::linspace;
use prethermal::siggen::{ac_imprint, add_noise, integrated_signal, snr_window, synth_decay};
use prethermal::{ACField, DecayModel, EffectiveAxis, SequenceParams, TimeSeries};
use serde::{Deserialize, Serialize};

use super::{out_dir, read_trace, require, write_svg, TWO_PI};
use crate::output::{num, write_atomic, write_csv};
use crate::svg::{stacked, Panel, Scale, Series};
use crate::{CliError, Globals};

/// `weight:t2` pair.
pub fn parse_component(s: &str) -> Result<[f64; 2], String> {
    let (w, t) = s.split_once(':').ok_or_else(|| format!("`{s}` is not weight:t2"))?;
    Ok([w.trim().parse().map_err(|_| format!("bad weight in `{s}`"))?, t.trim().parse().map_err(|_| format!("bad t2 in `{s}`"))?])
}

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Uniformly sampled carrier trace; otherwise the carrier is synthesized from `components`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Carrier components `weight:t2_s`, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_component)]
    #[serde(default)]
    pub components: Vec<[f64; 2]>,
    /// Sample rate of a synthesized carrier in Hz [default: 1000]
    #[arg(long)]
    pub fs_hz: Option<f64>,
    /// Start of a synthesized carrier in s [default: 0]
    #[arg(long)]
    pub t_start_s: Option<f64>,
    /// End of a synthesized carrier in s [default: 600]
    #[arg(long)]
    pub t_end_s: Option<f64>,
    /// AC field amplitude in T
    #[arg(long)]
    pub b_ac_t: Option<f64>,
    /// AC field frequency in Hz
    #[arg(long)]
    pub f_ac_hz: Option<f64>,
    /// AC field phase in rad [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub phase_rad: Option<f64>,
    /// Polar angle of the effective axis in degrees; otherwise computed from the sequence
    #[arg(long)]
    pub theta_eff_deg: Option<f64>,
    /// Sequence pulse length in s [default: 34e-6]
    #[arg(long)]
    pub tau1_s: Option<f64>,
    /// Sequence gap in s [default: 43e-6]
    #[arg(long)]
    pub tau2_s: Option<f64>,
    /// Nominal flip angle in degrees, at the drive strength of a 90 deg pulse of 34 us [default: 90]
    #[arg(long)]
    pub flip_deg: Option<f64>,
    /// Resonance offset in Hz [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub offset_hz: Option<f64>,
    /// Imprint gain per tesla [default: 100]
    #[arg(long)]
    pub gain: Option<f64>,
    /// Window centres in s, comma separated [default: 60,180,300,580]
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub windows_s: Vec<f64>,
    /// Window length in s [default: 1]
    #[arg(long)]
    pub window_len_s: Option<f64>,
    /// Gaussian noise added after the imprint
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
}

fn axis(a: &Args) -> Result<EffectiveAxis, CliError> {
    if let Some(th) = a.theta_eff_deg {
        return Ok(EffectiveAxis { theta_eff: th.to_radians(), phi_eff: 0.0, omega_eff: 1.0 });
    }
    // flip angle set by pulse length at a fixed drive strength
    let wx = std::f64::consts::FRAC_PI_2 / 34e-6;
    let tau1 = a.tau1_s.unwrap_or(a.flip_deg.unwrap_or(90.0).to_radians() / wx);
    let p = SequenceParams::new(tau1, a.tau2_s.unwrap_or(43e-6), wx, TWO_PI * a.offset_hz.unwrap_or(0.0))?;
    Ok(effective_from_propagator(&p)?)
}

fn carrier(a: &Args) -> Result<TimeSeries, CliError> {
    match (&a.input, a.components.is_empty()) {
        (Some(p), true) => read_trace(p),
        (None, false) => {
            let model = DecayModel::new(a.components.iter().map(|c| (c[0], c[1])).collect(), 0.0)?;
            let fs = a.fs_hz.unwrap_or(1000.0);
            let (t0, t1) = (a.t_start_s.unwrap_or(0.0), a.t_end_s.unwrap_or(600.0));
            if !(fs > 0.0) || !(t1 > t0) {
                return Err(CliError::parse("need fs_hz > 0 and t_end_s > t_start_s"));
            }
            let n = ((t1 - t0) * fs).floor() as usize + 1;
            Ok(synth_decay(&model, &linspace(t0, t0 + (n - 1) as f64 / fs, n))?)
        }
        _ => Err(CliError::parse("give either input or components for the carrier")),
    }
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let field = ACField::new(require(&a.b_ac_t, "b_ac_t")?, require(&a.f_ac_hz, "f_ac_hz")?, a.phase_rad.unwrap_or(0.0))?;
    let ax = axis(&a)?;
    let base = carrier(&a)?;
    let dir = out_dir(&a.out_dir)?;
    let mut trace = ac_imprint(&base, &field, &ax, a.gain.unwrap_or(100.0))?;
    if let Some(s) = a.noise_sigma {
        trace = add_noise(&trace, s, g.seed)?;
    }
    let centres = if a.windows_s.is_empty() { vec![60.0, 180.0, 300.0, 580.0] } else { a.windows_s.clone() };
    let len = a.window_len_s.unwrap_or(1.0);

    let mut rows = Vec::new();
    for &c in &centres {
        let w = (c - len / 2.0, c + len / 2.0);
        let s = integrated_signal(&trace, field.f_ac, w).map_err(|e| CliError::from(e).annotate(format!("window at {c} s")))?;
        let snr = snr_window(&trace, field.f_ac, w).map_err(|e| CliError::from(e).annotate(format!("window at {c} s")))?;
        rows.push((c, w, s, snr));
    }

    write_atomic(&dir.join("sense_trace.csv"), |w| Ok(write_trace_csv(&trace, w)?))?;
    write_csv(
        &dir.join("delta.csv"),
        &["time_s", "delta"],
        trace.times().iter().zip(trace.values()).zip(base.values()).map(|((t, s), c)| [num(*t), num(s - c)]),
    )?;
    write_csv(
        &dir.join("windows.csv"),
        &["centre_s", "start_s", "end_s", "integrated_signal", "snr"],
        rows.iter().map(|(c, w, s, snr)| [num(*c), num(w.0), num(w.1), num(*s), num(*snr)]),
    )?;
    if g.svg {
        let panels: Vec<Panel> = rows
            .iter()
            .map(|(c, w, _, snr)| {
                let pts = trace
                    .times()
                    .iter()
                    .zip(trace.values())
                    .zip(base.values())
                    .filter(|((t, _), _)| **t >= w.0 && **t <= w.1)
                    .map(|((t, s), b)| (*t, s - b))
                    .collect();
                Panel {
                    title: format!("window at {c} s, SNR {snr:.1}"),
                    x_label: "time (s)".into(),
                    y_label: "delta S".into(),
                    x_scale: Scale::Linear,
                    y_scale: Scale::Linear,
                    series: vec![Series::new("", pts)],
                }
            })
            .collect();
        write_svg(&dir.join("sense.svg"), &stacked(&panels))?;
    }
    println!("theta_eff = {:.2} deg", ax.theta_eff.to_degrees());
    for (c, _, s, snr) in &rows {
        println!("  window {c} s: integrated signal {s:.4e}, SNR {snr:.2}");
    }
    Ok(())
}
