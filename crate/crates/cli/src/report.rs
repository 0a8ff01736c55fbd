use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Ordered `key: value` summary of a command run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub entries: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Deterministic part of the report, without the wall-clock time.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(&format!("{k}: {v}\n"));
        }
        for f in &self.files {
            s.push_str(&format!("file: {}\n", f.display()));
        }
        s
    }

    /// Writes `report.txt` into `dir` (with wall-clock) and records it.
    pub fn write_to(&mut self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("report.txt");
        self.files.push(path.clone());
        let text = format!(
            "{}wall_clock_s: {:.3}\n",
            self.render(),
            self.elapsed.as_secs_f64()
        );
        fs::write(&path, text).map_err(|source| io_error(&path, source))?;
        Ok(path)
    }
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Hex SHA-256 over the given byte chunks.
pub fn content_hash<'a>(chunks: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update(c);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
