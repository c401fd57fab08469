//! Text formats: the canonical mesh file, a PolyMesher export reader and
//! CSV output. Files are written through a temporary file and renamed into
//! place, so a failed run never leaves a partial file behind.

mod csv;
mod mesh_file;
mod polymesher;

use std::io::Write;
use std::path::Path;

pub use csv::{convergence_csv, error_report_csv, solution_csv};
pub use mesh_file::{parse_mesh, render_mesh, MeshFile, MESH_HEADER};
pub use polymesher::{parse_polymesher, PolyMesherData};

use crate::error::Result;

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` atomically (temporary file in the same
/// directory, then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Splits a line into whitespace-separated tokens, dropping `#` comments.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    line.split('#').next().unwrap_or("").split_whitespace().collect()
}
