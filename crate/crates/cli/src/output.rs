//! Deterministic file output: CSV with fixed float encoding, JSON echoes.
//!
//! Every writer renders to an in-memory buffer and writes the file in one
//! call, so identical inputs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

/// Shortest round-trip decimal for a float; `nan` and `inf`/`-inf` literals
/// for the non-finite values, keeping the CSV parseable by strict readers.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

/// Writes RFC-4180 rows (LF-terminated) built from string fields.
pub struct CsvFile {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvFile {
    pub fn new(header: &[&str]) -> CliResult<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(header)
            .map_err(|e| CliError::Failure(format!("csv header: {e}")))?;
        Ok(CsvFile { writer })
    }

    pub fn write_row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::Failure(format!("csv row: {e}")))
    }

    pub fn save(self, path: &Path) -> CliResult<()> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| CliError::Failure(format!("csv flush: {e}")))?;
        write_bytes(path, &bytes)
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("json encode: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Creates the output directory (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Failure(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}
