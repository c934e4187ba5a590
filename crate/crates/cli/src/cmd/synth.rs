use std::path::PathBuf;

use prethermal::laplace::io::{write_trace_bin, write_trace_csv};
use prethermal::series::{linspace, logspace};
use prethermal::siggen::{add_noise, synth_decay, Surrogate};
use prethermal::DecayModel;
use serde::{Deserialize, Serialize};

use super::require;
use super::sense::parse_component;
use crate::output::write_atomic;
use crate::{CliError, Globals};

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Output trace file
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Components `weight:t2_s`, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_component)]
    #[serde(default)]
    pub components: Vec<[f64; 2]>,
    /// Constant offset added to the decay [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub baseline: Option<f64>,
    /// First sample time in s [default: 0.01]
    #[arg(long)]
    pub t_start_s: Option<f64>,
    /// Last sample time in s [default: 600]
    #[arg(long)]
    pub t_end_s: Option<f64>,
    /// Number of samples [default: 10000]
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Sample times `linear` or `log` [default: linear]
    #[arg(long)]
    pub spacing: Option<String>,
    /// Gaussian noise level [default: 0]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Stream linearly spaced samples through a log binner instead of writing them all
    #[arg(long)]
    #[serde(default)]
    pub binned: bool,
    /// Bins per decade for `binned` [default: 50]
    #[arg(long)]
    pub bins_per_decade: Option<f64>,
    /// Linear-bin floor for `binned` in s [default: 0.1]
    #[arg(long)]
    pub t_floor: Option<f64>,
    /// Output format `csv` or `bin` [default: csv]
    #[arg(long)]
    pub format: Option<String>,
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let out = require(&a.output, "output")?;
    if a.components.is_empty() {
        return Err(CliError::parse("missing required option `components`"));
    }
    let model = DecayModel::new(a.components.iter().map(|c| (c[0], c[1])).collect(), a.baseline.unwrap_or(0.0))?;
    let (t0, t1) = (a.t_start_s.unwrap_or(0.01), a.t_end_s.unwrap_or(600.0));
    let n = a.n_samples.unwrap_or(10_000);
    let sigma = a.sigma.unwrap_or(0.0);
    let trace = if a.binned {
        let s = Surrogate {
            t_start: t0,
            t_end: t1,
            n_samples: n,
            bins_per_decade: a.bins_per_decade.unwrap_or(50.0),
            t_floor: a.t_floor.unwrap_or(0.1),
            ..Surrogate::new(model, sigma, g.seed)
        };
        s.generate()?
    } else {
        let times = match a.spacing.as_deref().unwrap_or("linear") {
            "linear" => linspace(t0, t1, n),
            "log" => logspace(t0, t1, n),
            other => return Err(CliError::parse(format!("unknown spacing `{other}` (linear, log)"))),
        };
        let clean = synth_decay(&model, &times)?;
        if sigma > 0.0 {
            add_noise(&clean, sigma, g.seed)?
        } else {
            clean
        }
    };
    if let Some(d) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        crate::output::ensure_dir(d)?;
    }
    match a.format.as_deref().unwrap_or("csv") {
        "csv" => write_atomic(&out, |w| Ok(write_trace_csv(&trace, w)?))?,
        "bin" => write_atomic(&out, |w| Ok(write_trace_bin(&trace, w)?))?,
        other => return Err(CliError::parse(format!("unknown format `{other}` (csv, bin)"))),
    }
    println!("wrote {} samples to {}", trace.len(), out.display());
    Ok(())
}
