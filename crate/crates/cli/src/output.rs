//! CSV/JSON rendering and all-or-nothing file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// 17 significant digits, '.' decimal point.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table built fully in memory before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Sidecar path next to a data file: `trace.csv` → `trace.json`.
pub fn sidecar_path(out: &Path) -> Result<PathBuf, CliError> {
    let side = out.with_extension("json");
    if side == out {
        return Err(CliError::Config(format!(
            "--out {} would collide with its JSON sidecar",
            out.display()
        )));
    }
    Ok(side)
}

/// Where each rendered document goes.
pub enum Sink {
    Stdout,
    File(PathBuf),
    Stderr,
}

/// Writes every document or none. Files are staged as temporaries in their
/// target directory and only renamed into place once all of them are written.
pub fn emit(docs: Vec<(Sink, String)>) -> Result<(), CliError> {
    let mut staged = Vec::new();
    for (sink, body) in &docs {
        if let Sink::File(path) = sink {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .map_err(|e| CliError::Config(format!("cannot write to {}: {e}", dir.display())))?;
            tmp.write_all(body.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            staged.push((tmp, path.clone()));
        }
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    for (sink, body) in docs {
        match sink {
            Sink::Stdout => print!("{body}"),
            Sink::Stderr => eprint!("{body}"),
            Sink::File(_) => {}
        }
    }
    Ok(())
}
