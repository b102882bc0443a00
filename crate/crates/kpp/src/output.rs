//! CSV and `meta.txt` emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Output directory of one subcommand.
#[derive(Debug, Clone)]
pub struct OutDir {
    pub path: PathBuf,
}

impl OutDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(OutDir { path })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Write a CSV with a header row; values use the shortest round-trip form.
    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.file(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(header).map_err(|e| csv_error(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// `meta.txt` with one `key=value` per line.
    pub fn meta(&self, pairs: &[(String, String)]) -> Result<PathBuf, CliError> {
        let path = self.file("meta.txt");
        let mut text = String::new();
        for (k, v) in pairs {
            let _ = writeln!(text, "{k}={v}");
        }
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::bad_input(path, format!("{other:?}")),
        }
    } else {
        CliError::bad_input(path, e.to_string())
    }
}

/// Format a float so it parses back to the same bits.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Builder for `meta.txt` pairs.
#[derive(Debug, Default)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut m = Meta::default();
        m.add("command", command);
        m.add("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn add(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.0.push((k.to_string(), v.to_string()));
        self
    }
}

/// Read a `meta.txt` back into pairs.
pub fn read_meta(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect())
}
