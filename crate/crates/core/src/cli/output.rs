//! CSV tables and run manifests, written through a temporary file and a
//! rename so readers never see a partial file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Bumped whenever a column is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "QNLS_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub name: &'static str,
    pub doc: &'static str,
}

pub const fn col(name: &'static str, doc: &'static str) -> Column {
    Column { name, doc }
}

/// Text block listing every column, for `--help`.
pub fn columns_help(file: &str, columns: &[Column]) -> String {
    let width = columns.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = format!("Columns of {file}:\n");
    for c in columns {
        s.push_str(&format!("  {:<width$}  {}\n", c.name, c.doc));
    }
    s
}

/// Shortest round-trip representation; deterministic across platforms.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFile {
    pub path: PathBuf,
    pub rows: usize,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let tmp = temp_path(path);
    let outcome = (|| -> Result<()> {
        let file = File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
        let mut w = BufWriter::new(file);
        contents(&mut w)?;
        let file = w.into_inner().map_err(|e| io_error(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| io_error(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| io_error(path, e))
    })();
    if outcome.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    outcome
}

/// RFC 4180 CSV with a header row. Rows are written in the order given; an
/// `Err` row aborts the write and leaves any previous file at `path` intact.
pub fn write_table<I>(path: &Path, columns: &[Column], rows: I) -> Result<WrittenFile>
where
    I: IntoIterator<Item = Result<Vec<String>>>,
{
    let mut count = 0;
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
        };
        csv.write_record(columns.iter().map(|c| c.name)).map_err(csv_err)?;
        for row in rows {
            let row = row?;
            if row.len() != columns.len() {
                return Err(Error::LengthMismatch {
                    expected: columns.len(),
                    got: row.len(),
                });
            }
            csv.write_record(&row).map_err(csv_err)?;
            count += 1;
        }
        csv.flush().map_err(|e| io_error(path, e))
    })?;
    Ok(WrittenFile {
        path: path.to_path_buf(),
        rows: count,
    })
}

/// Plain-text record of one run: the resolved configuration, the crate
/// version, wall time and the files produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub files: Vec<WrittenFile>,
    pub summary: Vec<(String, String)>,
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command = {}\n", self.command));
        s.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        s.push_str(&format!("schema = {SCHEMA_VERSION}\n"));
        s.push_str(&format!("wall_seconds = {:.3}\n", self.wall_seconds));
        s.push_str("\n[config]\n");
        for (k, v) in &self.config {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str("\n[summary]\n");
        for (k, v) in &self.summary {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str("\n[files]\n");
        for f in &self.files {
            let name = f.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            s.push_str(&format!("{name} = {} rows\n", f.rows));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.txt", self.command));
        let text = self.render();
        write_atomic(&path, |w| w.write_all(text.as_bytes()).map_err(|e| io_error(&path, e)))?;
        Ok(path)
    }
}
