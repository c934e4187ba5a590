use std::path::PathBuf;

use prethermal::laplace::io::write_spectrum_csv;
use prethermal::laplace::{forward_model, invert_with, log_bin, InvertOptions};
use serde::{Deserialize, Serialize};

use super::{grid, out_dir, read_trace, require, write_svg};
use crate::output::{num, write_atomic, write_csv};
use crate::svg::{stacked, Panel, Scale, Series};
use crate::{CliError, Globals};

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Trace file (CSV `time_s,signal` or LITRACE1 binary)
    pub input: Option<PathBuf>,
    /// Output directory [default: .]
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
    /// Regularisation strength [default: 0.1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Smallest T2 of the log grid in s [default: 1e-3]
    #[arg(long)]
    pub t2_min: Option<f64>,
    /// Largest T2 of the log grid in s [default: 1e4]
    #[arg(long)]
    pub t2_max: Option<f64>,
    /// Grid points [default: 200]
    #[arg(long)]
    pub n_t2: Option<usize>,
    /// Log-bin the trace first at this many bins per decade
    #[arg(long)]
    pub bins_per_decade: Option<f64>,
    /// Linear-bin floor for log binning in s [default: 0.01]
    #[arg(long)]
    pub t_floor: Option<f64>,
    /// Per-sample noise level; otherwise taken from the trace metadata or estimated
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Minimum weight fraction of a reported peak [default: 0.05]
    #[arg(long)]
    pub min_weight: Option<f64>,
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let input = require(&a.input, "input")?;
    let dir = out_dir(&a.out_dir)?;
    let alpha = a.alpha.unwrap_or(0.1);
    let min_weight = a.min_weight.unwrap_or(0.05);
    if !(min_weight > 0.0 && min_weight < 1.0) {
        return Err(CliError::parse("min_weight must lie in (0, 1)"));
    }
    let grid = grid(a.t2_min, a.t2_max, a.n_t2)?;

    let mut trace = read_trace(&input)?;
    if let Some(bpd) = a.bins_per_decade {
        trace = log_bin(&trace, bpd, a.t_floor.unwrap_or(0.01))?;
    }
    let opts = InvertOptions { noise_sigma: a.noise_sigma, ..Default::default() };
    let sp = invert_with(&trace, &grid, alpha, &opts)?;
    let fit = forward_model(&sp, trace.times())?;
    let peaks = sp.peaks(min_weight);
    let total = sp.total_weight();

    write_atomic(&dir.join("spectrum.csv"), |w| Ok(write_spectrum_csv(&sp, w)?))?;
    write_csv(
        &dir.join("residual.csv"),
        &["time_s", "signal", "fit", "residual"],
        trace.times().iter().zip(trace.values()).zip(fit.values()).map(|((t, s), f)| [num(*t), num(*s), num(*f), num(s - f)]),
    )?;
    write_csv(
        &dir.join("peaks.csv"),
        &["t2_s", "weight", "weight_frac"],
        peaks.iter().map(|p| [num(p.t2), num(p.weight), num(p.weight / total)]),
    )?;
    if g.svg {
        let spec = Panel {
            title: format!("T2 spectrum (alpha = {alpha})"),
            x_label: "T2 (s)".into(),
            y_label: "weight".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Linear,
            series: vec![Series::new("", grid.points().iter().cloned().zip(sp.weights.iter().cloned()).collect())],
        };
        let data = Panel {
            title: "trace and fit".into(),
            x_label: "time (s)".into(),
            y_label: "signal".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Linear,
            series: vec![
                Series::new("data", trace.times().iter().cloned().zip(trace.values().iter().cloned()).collect()),
                Series::new("fit", trace.times().iter().cloned().zip(fit.values().iter().cloned()).collect()),
            ],
        };
        write_svg(&dir.join("spectrum.svg"), &stacked(&[spec, data]))?;
    }
    println!("{} peaks (weight fraction >= {min_weight}), residual norm {:.3e}", peaks.len(), sp.residual_norm);
    for p in &peaks {
        println!("  T2 = {:.4e} s  weight = {:.4e} ({:.1}%)", p.t2, p.weight, 100.0 * p.weight / total);
    }
    Ok(())
}
