//! CSV writers and run-directory layout. Files are written to a temporary
//! name and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliResult;
use crate::pipeline::SolveOutput;

pub const OUT_ENV: &str = "PVQA_OUT";
pub const DEFAULT_ROOT: &str = "runs";

pub const SOLUTION_FILE: &str = "solution.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RECORD_FILE: &str = "record.csv";
pub const DEPTH_FILE: &str = "depth.csv";
pub const FIDELITY_FILE: &str = "fidelity.csv";
pub const PLATEAU_FILE: &str = "plateau.csv";

/// `explicit`, else `configured`, else `$PVQA_OUT/<name>`, else
/// `runs/<name>`.
pub fn resolve_dir(explicit: Option<&Path>, configured: Option<&Path>, name: &str) -> PathBuf {
    if let Some(p) = explicit.or(configured) {
        return p.to_path_buf();
    }
    let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_ROOT), PathBuf::from);
    root.join(name)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| crate::error::CliError::Io(e.to_string()))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    write_atomic(path, &csv_bytes(rows)?)
}

pub fn write_solve(dir: &Path, out: &SolveOutput) -> CliResult<()> {
    write_csv(&dir.join(SOLUTION_FILE), &out.solution)?;
    write_csv(&dir.join(TRACE_FILE), &out.trace)?;
    write_csv(&dir.join(RECORD_FILE), std::slice::from_ref(&out.record))
}
