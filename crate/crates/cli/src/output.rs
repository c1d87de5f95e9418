use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const DEFAULT_OUT: &str = "results";

pub fn out_dir(flag: Option<&PathBuf>, file: Option<&PathBuf>) -> PathBuf {
    flag.or(file).cloned().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::write("<stdout>", e))
        }
    }
}

/// Quotes a CSV field when needed.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Relative change from `a` to `b` in percent with an explicit sign.
pub fn percent_diff(a: f64, b: f64) -> String {
    if a == b {
        return "0.00".into();
    }
    let d = (b - a) / a * 100.0;
    if d.is_infinite() {
        if d > 0.0 { "+inf".into() } else { "-inf".into() }
    } else {
        format!("{d:+.2}")
    }
}
