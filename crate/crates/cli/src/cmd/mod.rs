pub mod invert;
pub mod map;
pub mod rates;
pub mod sense;
pub mod simulate;
pub mod synth;

use std::path::{Path, PathBuf};

use prethermal::laplace::io::read_trace_file;
use prethermal::{T2Grid, TimeSeries};

use crate::output::write_atomic;
use crate::CliError;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::parse(format!("missing required option `{name}`")))
}

pub fn read_trace(path: &Path) -> Result<TimeSeries, CliError> {
    if !path.is_file() {
        return Err(CliError::parse(format!("input {} not found", path.display())));
    }
    read_trace_file(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

pub fn out_dir(dir: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    crate::output::ensure_dir(dir.as_deref().unwrap_or(Path::new(".")))
}

pub fn grid(t2_min: Option<f64>, t2_max: Option<f64>, n: Option<usize>) -> Result<T2Grid, CliError> {
    Ok(T2Grid::log(t2_min.unwrap_or(1e-3), t2_max.unwrap_or(1e4), n.unwrap_or(200))?)
}

pub fn write_svg(path: &Path, doc: &str) -> Result<(), CliError> {
    write_atomic(path, |w| w.write_all(doc.as_bytes()).map_err(|e| CliError::io(e.to_string())))
}
