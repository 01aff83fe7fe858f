//! File outputs. Every file is written to a temporary sibling and renamed on success,
//! so a failed run leaves no partial files behind.

use crate::error::{CliError, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use tempfile::NamedTempFile;
use zrp_core::weights::WeightSeq;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes through `fill` into a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    ensure_dir(dir)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// CSV with a header row; an empty slice still gets the header.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
        csv.write_record(header).map_err(err)?;
        for row in rows {
            csv.serialize(row).map_err(err)?;
        }
        csv.flush().map_err(|e| CliError::io(path, e))
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).map_err(|e| CliError::io(path, e))
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e)))
}

#[derive(Serialize)]
struct WeightRow {
    k: usize,
    p_k: f64,
    u_k: f64,
}

/// Weight table `k, p_k, u_k` for `k ≤ kmax`; `u_0` is written as 0.
pub fn write_weights(path: &Path, seq: &WeightSeq, kmax: usize) -> Result<()> {
    let u = seq.hop_rates(kmax);
    let rows: Vec<WeightRow> = (0..=kmax).map(|k| WeightRow { k, p_k: seq.weight(k), u_k: u[k] }).collect();
    write_csv(path, &["k", "p_k", "u_k"], &rows)
}
