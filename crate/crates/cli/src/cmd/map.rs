use std::path::{Path, PathBuf};

use prethermal::laplace::{invert_with, log_bin, InvertOptions};
use prethermal::{Spectrum, TimeSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{grid, out_dir, read_trace, require, write_svg};
use crate::output::{num, write_csv};
use crate::svg::heatmap;
use crate::{CliError, Globals};

#[derive(clap::Args, Serialize, Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Args {
    /// Directory of trace files, or one CSV with columns `time_s,<label>,<label>,...`
    pub input: Option<PathBuf>,
    /// Name of the swept parameter; a trace's label is its metadata value under this key,
    /// otherwise the token after the last `_` or `=` in the file name [default: sweep]
    #[arg(long)]
    pub parameter: Option<String>,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t2_min: Option<f64>,
    #[arg(long)]
    pub t2_max: Option<f64>,
    #[arg(long)]
    pub n_t2: Option<usize>,
    #[arg(long)]
    pub bins_per_decade: Option<f64>,
    #[arg(long)]
    pub t_floor: Option<f64>,
    #[arg(long)]
    pub min_weight: Option<f64>,
}

struct Slice {
    label: String,
    value: f64,
    trace: Result<TimeSeries, CliError>,
}

fn label_from_stem(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_str()?;
    let tok = stem.rsplit(['_', '=']).next()?;
    tok.parse::<f64>().ok().map(|_| tok.to_string())
}

fn slices_from_dir(dir: &Path, parameter: &str) -> Result<Vec<Slice>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::parse(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|x| x.to_str()), Some("csv" | "bin")))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let trace = read_trace(&p);
            let label = trace
                .as_ref()
                .ok()
                .and_then(|t| t.meta().get(parameter).cloned())
                .or_else(|| label_from_stem(&p))
                .ok_or_else(|| CliError::parse(format!("{}: no `{parameter}` metadata and no numeric label in the name", p.display())))?;
            let value = label.trim().parse::<f64>().map_err(|_| CliError::parse(format!("{}: label `{label}` is not numeric", p.display())))?;
            Ok(Slice { label, value, trace })
        })
        .collect()
}

fn slices_from_table(path: &Path) -> Result<Vec<Slice>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr.headers().map_err(|e| CliError::parse(e.to_string()))?.iter().map(String::from).collect();
    if header.len() < 2 || header[0] != "time_s" {
        return Err(CliError::parse(format!("{}: expected header `time_s,<label>,...`", path.display())));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(e.to_string()))?;
        for (k, f) in rec.iter().enumerate() {
            let v = f.parse::<f64>().map_err(|_| CliError::parse(format!("{}: row {}: `{f}` is not a number", path.display(), i + 2)))?;
            cols[k].push(v);
        }
    }
    let times = cols[0].clone();
    header[1..]
        .iter()
        .zip(&cols[1..])
        .map(|(label, v)| {
            let value = label.parse::<f64>().map_err(|_| CliError::parse(format!("column label `{label}` is not numeric")))?;
            Ok(Slice { label: label.clone(), value, trace: TimeSeries::new(times.clone(), v.clone()).map_err(CliError::from) })
        })
        .collect()
}

pub fn run(flags: &Args, g: &Globals) -> Result<(), CliError> {
    let a: Args = crate::config::resolve(flags, g.config.as_deref())?;
    let input = require(&a.input, "input")?;
    let parameter = a.parameter.clone().unwrap_or_else(|| "sweep".into());
    let dir = out_dir(&a.out_dir)?;
    let alpha = a.alpha.unwrap_or(0.1);
    let min_weight = a.min_weight.unwrap_or(0.05);
    let grid = grid(a.t2_min, a.t2_max, a.n_t2)?;

    let mut slices = if input.is_dir() {
        slices_from_dir(&input, &parameter)?
    } else if input.is_file() {
        slices_from_table(&input)?
    } else {
        return Err(CliError::parse(format!("input {} not found", input.display())));
    };
    if slices.len() < 2 {
        return Err(CliError::parse("a map needs at least 2 traces"));
    }
    slices.sort_by(|x, y| x.value.total_cmp(&y.value));
    if let Some(w) = slices.windows(2).find(|w| w[0].value == w[1].value) {
        return Err(CliError::parse(format!("duplicate sweep label {}", w[0].label)));
    }

    let opts = InvertOptions::default();
    let results: Vec<Result<Spectrum, CliError>> = slices
        .par_iter()
        .map(|s| {
            let tr = s.trace.as_ref().map_err(|e| CliError { code: e.code, message: e.message.clone() })?;
            let tr = match a.bins_per_decade {
                Some(bpd) => log_bin(tr, bpd, a.t_floor.unwrap_or(0.01))?,
                None => tr.clone(),
            };
            Ok(invert_with(&tr, &grid, alpha, &opts)?)
        })
        .collect();

    let mut ok: Vec<(&Slice, Spectrum)> = Vec::new();
    let mut first_err = None;
    for (s, r) in slices.iter().zip(results) {
        match r {
            Ok(sp) => ok.push((s, sp)),
            Err(e) => {
                eprintln!("slice {parameter}={}: {}", s.label, e.message);
                first_err.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        let e = first_err.expect("at least one slice");
        return Err(CliError { code: e.code, message: format!("every slice failed; first: {}", e.message) });
    }

    write_csv(
        &dir.join("map.csv"),
        &["sweep", "t2_s", "weight"],
        ok.iter().flat_map(|(s, sp)| grid.points().iter().zip(&sp.weights).map(|(t, w)| [s.label.clone(), num(*t), num(*w)])),
    )?;
    write_csv(
        &dir.join("map_peaks.csv"),
        &["sweep", "t2_s", "weight"],
        ok.iter().flat_map(|(s, sp)| sp.peaks(min_weight).into_iter().map(|p| [s.label.clone(), num(p.t2), num(p.weight)])),
    )?;
    if g.svg {
        let sweep: Vec<f64> = ok.iter().map(|(s, _)| s.value).collect();
        let weights: Vec<Vec<f64>> = ok.iter().map(|(_, sp)| sp.weights.clone()).collect();
        write_svg(&dir.join("map.svg"), &heatmap(&format!("lifetime map (alpha = {alpha})"), &parameter, &sweep, grid.points(), &weights))?;
    }
    println!("{} of {} slices inverted", ok.len(), slices.len());
    Ok(())
}
