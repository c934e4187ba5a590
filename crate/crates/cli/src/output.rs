use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Creates `dir` (and parents) and returns it.
pub fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Writes `path` through a temporary file in the same directory, renamed into place on success.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// CSV file with a header row; every record is a row of floats or strings.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    write_atomic(path, |w| {
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(header)?;
        for r in rows {
            cw.write_record(r)?;
        }
        cw.flush().map_err(|e| CliError::io(e.to_string()))
    })
}

/// Shortest round-trip representation, so reruns are byte-identical and values reparse exactly.
pub fn num(x: f64) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_csv(&p, &["x"], [[num(1.5)]]).unwrap();
        write_csv(&p, &["x"], [[num(2.5)]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x\n2.5\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn failed_body_keeps_the_old_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "old").unwrap();
        let r = write_atomic(&p, |_| Err(CliError::solver("boom")));
        assert!(r.is_err());
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "old");
    }
}
