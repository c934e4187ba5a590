//! Trace, spectrum and map file formats.
//!
//! * trace CSV: header `time_s,signal`, optional `# key=value` lines; log-binned traces add a
//!   third column `count` with the samples per bin
//! * trace binary: `LITRACE1`, u64 count, then count x (f64 time, f64 value), little endian
//! * spectrum CSV `t2_s,weight`; map CSV `sweep,t2_s,weight`
use std::io::{Read, Write};
use std::path::Path;

use super::{LIMap, Spectrum};
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"LITRACE1";

pub fn read_trace_csv(mut r: impl Read) -> Result<TimeSeries> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut meta = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let with_counts = match headers.iter().collect::<Vec<_>>()[..] {
        ["time_s", "signal"] => false,
        ["time_s", "signal", "count"] => true,
        _ => {
            let found = headers.iter().collect::<Vec<_>>().join(",");
            return Err(Error::Parse(format!("expected header `time_s,signal` or `time_s,signal,count`, found `{found}`")));
        }
    };
    let (mut t, mut v, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}: `{s}`", i + 1)));
        t.push(parse(&rec[0])?);
        v.push(parse(&rec[1])?);
        if with_counts {
            c.push(rec[2].parse::<u64>().map_err(|e| Error::Parse(format!("row {}: {e}: `{}`", i + 1, &rec[2])))?);
        }
    }
    let ts = if with_counts { TimeSeries::with_counts(t, v, c) } else { TimeSeries::new(t, v) };
    let mut ts = ts.map_err(|e| Error::Parse(e.to_string()))?;
    ts.meta_mut().extend(meta);
    Ok(ts)
}

pub fn write_trace_csv(ts: &TimeSeries, mut w: impl Write) -> Result<()> {
    for (k, v) in ts.meta() {
        writeln!(w, "# {k}={v}")?;
    }
    let mut cw = csv::Writer::from_writer(w);
    match ts.counts() {
        Some(c) => {
            cw.write_record(["time_s", "signal", "count"])?;
            for ((t, v), n) in ts.times().iter().zip(ts.values()).zip(c) {
                cw.write_record([t.to_string(), v.to_string(), n.to_string()])?;
            }
        }
        None => {
            cw.write_record(["time_s", "signal"])?;
            for (t, v) in ts.times().iter().zip(ts.values()) {
                cw.write_record([t.to_string(), v.to_string()])?;
            }
        }
    }
    cw.flush()?;
    Ok(())
}

/// Bin populations are not stored in the binary format.
pub fn read_trace_bin(mut r: impl Read) -> Result<TimeSeries> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| Error::Parse("truncated binary header".into()))?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Parse("bad binary magic".into()));
    }
    let mut n8 = [0u8; 8];
    r.read_exact(&mut n8).map_err(|_| Error::Parse("truncated binary header".into()))?;
    let n = u64::from_le_bytes(n8) as usize;
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() != n * 16 {
        return Err(Error::Parse(format!("binary body has {} bytes, expected {}", buf.len(), n * 16)));
    }
    let f = |k: usize| f64::from_le_bytes(buf[k * 8..k * 8 + 8].try_into().unwrap());
    let t = (0..n).map(|i| f(2 * i)).collect();
    let v = (0..n).map(|i| f(2 * i + 1)).collect();
    TimeSeries::new(t, v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_trace_bin(ts: &TimeSeries, mut w: impl Write) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(ts.len() as u64).to_le_bytes())?;
    for (t, v) in ts.times().iter().zip(ts.values()) {
        w.write_all(&t.to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads either format, choosing by the magic bytes.
pub fn read_trace_file(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let bytes = std::fs::read(path.as_ref())?;
    if bytes.is_empty() {
        return Err(Error::Parse(format!("{} is empty", path.as_ref().display())));
    }
    if bytes.starts_with(BINARY_MAGIC) {
        read_trace_bin(&bytes[..])
    } else {
        read_trace_csv(&bytes[..])
    }
}

pub fn write_spectrum_csv(sp: &Spectrum, w: impl Write) -> Result<()> {
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(["t2_s", "weight"])?;
    for (t, x) in sp.grid.points().iter().zip(&sp.weights) {
        cw.write_record([t.to_string(), x.to_string()])?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(r: impl Read) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let (mut t, mut w) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        t.push(rec[0].parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        w.push(rec[1].parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
    }
    Ok((t, w))
}

pub fn write_limap_csv(map: &LIMap, w: impl Write) -> Result<()> {
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(["sweep", "t2_s", "weight"])?;
    for (v, sp) in map.sweep_values.iter().zip(&map.spectra) {
        for (t, x) in sp.grid.points().iter().zip(&sp.weights) {
            cw.write_record([v.to_string(), t.to_string(), x.to_string()])?;
        }
    }
    cw.flush()?;
    Ok(())
}
