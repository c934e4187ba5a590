use std::path::PathBuf;

use nalgebra::DMatrix;
use prethermal::spinsim::{evolve_train, lifetime_scan, random_clusters, SimOptions, SweepParam, COUPLING_SCALE_13C};
use prethermal::{PulseTrain, SimTrace, SpinCluster};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{out_dir, write_svg, TWO_PI};
use crate::config::read_json;
use crate::output::{num, write_csv};
use crate::svg::{stacked, Panel, Scale, Series};
use crate::{CliError, Globals};

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Cluster JSON with `positions_nm` (optional `b_axis`) or `couplings_radps`
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    /// Spins per random cluster when no cluster file is given [default: 6]
    #[arg(long)]
    pub n_spins: Option<usize>,
    /// Random clusters to average [default: 8]
    #[arg(long)]
    pub n_clusters: Option<usize>,
    /// Median coupling of random clusters in Hz [default: 600]
    #[arg(long)]
    pub j_hz: Option<f64>,
    /// Pulse length in s [default: 5e-6]
    #[arg(long)]
    pub t_p_s: Option<f64>,
    /// Gap between pulses in s [default: 15e-6]
    #[arg(long)]
    pub tau_gap_s: Option<f64>,
    /// Drive strength omega_x / 2 pi in Hz (overrides flip_deg)
    #[arg(long)]
    pub omega_x_hz: Option<f64>,
    /// Nominal flip angle in degrees [default: 90]
    #[arg(long)]
    pub flip_deg: Option<f64>,
    /// Resonance offset in Hz [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub offset_hz: Option<f64>,
    /// Number of pulses [default: 1000]
    #[arg(long)]
    pub n_pulses: Option<usize>,
    /// Sweep JSON `{parameter, values, base_train}`; parameter is t_p, tau_gap, offset_hz or omega_x_hz
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Swept parameter (alternative to a sweep file)
    #[arg(long)]
    pub sweep_parameter: Option<String>,
    /// Swept values, comma separated, in s or Hz
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default)]
    pub sweep_values: Vec<f64>,
    /// Work budget per propagation in floating-point operations [default: 5e11]
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
}

/// Pulse train as written in sweep files.
#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub t_p_s: Option<f64>,
    pub tau_gap_s: Option<f64>,
    pub omega_x_hz: Option<f64>,
    pub flip_deg: Option<f64>,
    pub offset_hz: Option<f64>,
    pub n_pulses: Option<usize>,
}

impl Args {
    fn train(&self) -> TrainSpec {
        TrainSpec {
            t_p_s: self.t_p_s,
            tau_gap_s: self.tau_gap_s,
            omega_x_hz: self.omega_x_hz,
            flip_deg: self.flip_deg,
            offset_hz: self.offset_hz,
            n_pulses: self.n_pulses,
        }
    }
}

impl TrainSpec {
    fn build(&self) -> Result<PulseTrain, CliError> {
        let t_p = self.t_p_s.unwrap_or(5e-6);
        let wx = match self.omega_x_hz {
            Some(f) => TWO_PI * f,
            None => self.flip_deg.unwrap_or(90.0).to_radians() / t_p,
        };
        Ok(PulseTrain::new(t_p, self.tau_gap_s.unwrap_or(15e-6), wx, TWO_PI * self.offset_hz.unwrap_or(0.0), self.n_pulses.unwrap_or(1000))?)
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    parameter: String,
    values: Vec<f64>,
    base_train: Option<TrainSpec>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct ClusterFile {
    positions_nm: Option<Vec<[f64; 3]>>,
    b_axis: Option<[f64; 3]>,
    couplings_radps: Option<Vec<Vec<f64>>>,
}

fn load_cluster(path: &std::path::Path) -> Result<SpinCluster, CliError> {
    let f: ClusterFile = read_json(path)?;
    let ctx = |e: prethermal::Error| CliError::parse(format!("{}: {e}", path.display()));
    match (f.positions_nm, f.couplings_radps) {
        (Some(p), None) => SpinCluster::from_positions(p, f.b_axis.unwrap_or([0.0, 0.0, 1.0]), COUPLING_SCALE_13C).map_err(ctx),
        (None, Some(c)) => {
            let n = c.len();
            if c.iter().any(|r| r.len() != n) {
                return Err(CliError::parse(format!("{}: couplings_radps must be square", path.display())));
            }
            SpinCluster::from_couplings(DMatrix::from_fn(n, n, |i, j| c[i][j])).map_err(ctx)
        }
        _ => Err(CliError::parse(format!("{}: give exactly one of positions_nm and couplings_radps", path.display()))),
    }
}

/// Core sweep parameter and the factor taking CLI units to internal ones.
fn sweep_param(name: &str) -> Result<(SweepParam, f64), CliError> {
    match name {
        "t_p" => Ok((SweepParam::TP, 1.0)),
        "tau_gap" => Ok((SweepParam::TauGap, 1.0)),
        "offset_hz" => Ok((SweepParam::DeltaOmega, TWO_PI)),
        "omega_x_hz" => Ok((SweepParam::OmegaX, TWO_PI)),
        _ => Err(CliError::parse(format!("unknown sweep parameter `{name}` (t_p, tau_gap, offset_hz, omega_x_hz)"))),
    }
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let dir = out_dir(&a.out_dir)?;
    let opts = SimOptions { budget: a.budget.unwrap_or(SimOptions::default().budget) };
    let clusters = match &a.cluster {
        Some(p) => vec![load_cluster(p)?],
        None => random_clusters(a.n_spins.unwrap_or(6), a.n_clusters.unwrap_or(8), a.j_hz.unwrap_or(600.0), g.seed)?,
    };

    let sweep = match (&a.sweep, &a.sweep_parameter) {
        (Some(_), Some(_)) => return Err(CliError::parse("give either a sweep file or sweep_parameter, not both")),
        (Some(p), None) => {
            let s: SweepFile = read_json(p)?;
            Some((s.parameter, s.values, s.base_train))
        }
        (None, Some(name)) => Some((name.clone(), a.sweep_values.clone(), None)),
        (None, None) => None,
    };
    let train = match sweep.as_ref().and_then(|s| s.2.clone()) {
        Some(t) => t.build()?,
        None => a.train().build()?,
    };

    let traces = clusters.par_iter().map(|c| evolve_train(c, &train, &opts)).collect::<Result<Vec<SimTrace>, _>>()?;
    let avg = SimTrace::average(&traces)?;
    write_csv(
        &dir.join("trace.csv"),
        &["time_s", "mx", "my", "mz"],
        (0..avg.len()).map(|i| [num(avg.times[i]), num(avg.mx[i]), num(avg.my[i]), num(avg.mz[i])]),
    )?;
    let mut panels = vec![Panel {
        title: format!("{} cluster(s), {} pulses", clusters.len(), train.n_pulses),
        x_label: "time (s)".into(),
        y_label: "magnetisation".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![
            Series::new("mx", avg.times.iter().cloned().zip(avg.mx.iter().cloned()).collect()),
            Series::new("|mxy|", avg.times.iter().cloned().zip(avg.mxy()).collect()),
        ],
    }];
    println!("{} cluster(s) of {} spins, {} pulses, final mx = {:.4}", clusters.len(), clusters[0].n(), train.n_pulses, avg.mx.last().unwrap());

    let mut budget_hit = None;
    if let Some((name, values, _)) = sweep {
        if values.is_empty() {
            return Err(CliError::parse("sweep needs at least one value"));
        }
        let (param, scale) = sweep_param(&name)?;
        let internal: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let entries = lifetime_scan(&clusters, &train, param, &internal, &opts)?;
        write_csv(
            &dir.join("scan.csv"),
            &[name.as_str(), "lifetime_s", "censored", "error"],
            values.iter().zip(&entries).map(|(v, e)| {
                [num(*v), e.lifetime.map(num).unwrap_or_default(), e.censored.to_string(), e.error.clone().unwrap_or_default()]
            }),
        )?;
        for (v, e) in values.iter().zip(&entries) {
            match (&e.lifetime, &e.error) {
                (Some(t), _) => println!("  {name} = {v}: lifetime {}{t:.4e} s", if e.censored { ">= " } else { "" }),
                (None, Some(err)) => {
                    eprintln!("  {name} = {v}: {err}");
                    if err.starts_with("budget exceeded") {
                        budget_hit.get_or_insert_with(|| err.clone());
                    }
                }
                _ => {}
            }
        }
        panels.push(Panel {
            title: "1/e lifetime of |mxy|".into(),
            x_label: name.clone(),
            y_label: "lifetime (s)".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            series: vec![Series::new("", values.iter().zip(&entries).filter_map(|(v, e)| e.lifetime.map(|t| (*v, t))).collect())],
        });
    }
    if g.svg {
        write_svg(&dir.join("simulate.svg"), &stacked(&panels))?;
    }
    match budget_hit {
        Some(m) => Err(CliError { code: 4, message: m }),
        None => Ok(()),
    }
}
