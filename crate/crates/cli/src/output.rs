//! Tables, manifests and file writing for one output directory.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, Params};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
        s.push('\n');
        s
    }
}

/// Collects the files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            format,
            files: Vec::new(),
        })
    }

    /// Writes raw bytes at `rel` (directories created as needed).
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(rel.to_string());
        Ok(path)
    }

    /// Writes `stem.csv` or `stem.json` per the run's format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.write(&format!("{stem}.csv"), table.to_csv().as_bytes()),
            Format::Json => self.write(&format!("{stem}.json"), table.to_json().as_bytes()),
        }
    }

    /// `config.toml` (re-runnable with `--config`) and `manifest.json`.
    pub fn finish(mut self, params: &Params, notes: &[(&str, String)]) -> Result<(), CliError> {
        let config = toml::to_string(&params.to_file_config()).map_err(|e| CliError::Config(e.to_string()))?;
        self.write("config.toml", config.as_bytes())?;
        let mut files = self.files.clone();
        files.sort();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            library_version: hermite_approx::VERSION,
            experiment: params.experiment.name(),
            parameters: params,
            basis: "h_k^alpha(x) = sqrt(alpha) * h_k(alpha * x)",
            rerun: "hermite-approx --config config.toml",
            notes: notes.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            files,
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        self.write("manifest.json", json.as_bytes())?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    experiment: &'static str,
    parameters: &'a Params,
    basis: &'static str,
    rerun: &'static str,
    notes: std::collections::BTreeMap<String, String>,
    files: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["n", "value", "label"]);
        t.push(vec![10usize.into(), 0.5.into(), "a".into()]);
        assert_eq!(t.to_csv(), "n,value,label\n10,0.5,a\n");
        let mut s = Table::new(&["v"]);
        s.push(vec![1.4e-22.into()]);
        assert_eq!(s.to_csv(), "v\n1.4e-22\n");
        assert!(t.to_json().contains("\"columns\""));
        let mut q = Table::new(&["signal"]);
        q.push(vec!["indicator[-0.5,0.5]".into()]);
        assert_eq!(q.to_csv(), "signal\n\"indicator[-0.5,0.5]\"\n");
    }
}
