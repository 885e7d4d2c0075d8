//! CSV and JSON writers that stamp every file with its provenance.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub code_version: String,
}

impl Meta {
    pub fn new(command: &str, config_sha256: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: config_sha256.to_string(),
            seed,
            code_version: CODE_VERSION.to_string(),
        }
    }
}

/// Shortest round-trip formatting, stable across runs.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub struct OutputDir {
    root: PathBuf,
    meta: Meta,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, meta: Meta) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            meta,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// `# key: value` header lines, then a CSV table with `columns`.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "# command: {}", self.meta.command)?;
        writeln!(file, "# config_sha256: {}", self.meta.config_sha256)?;
        writeln!(file, "# seed: {}", self.meta.seed)?;
        writeln!(file, "# code_version: {}", self.meta.code_version)?;
        writeln!(file, "# columns: {}", columns.join(","))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns)?;
        for row in rows {
            if row.len() != columns.len() {
                return Err(CliError::Config(format!(
                    "row of {} fields for {} columns in {name}",
                    row.len(),
                    columns.len()
                )));
            }
            w.write_record(row)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// `{"meta": …, "data": …}`.
    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            meta: &'a Meta,
            data: &'a T,
        }
        let path = self.root.join(name);
        let text = serde_json::to_string_pretty(&Envelope {
            meta: &self.meta,
            data,
        })?;
        fs::write(&path, text + "\n")?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Data rows of a CSV written by [`OutputDir::csv`], header row included.
pub fn read_csv_body(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = fs::read_to_string(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    r.records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_header_comments() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), Meta::new("solve", "abc", 7)).unwrap();
        let p = out
            .csv("t.csv", &["a", "b"], &[vec!["1".into(), num(0.5)]])
            .unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# command: solve\n# config_sha256: abc\n# seed: 7\n"));
        let body = read_csv_body(&p).unwrap();
        assert_eq!(body, vec![vec!["a", "b"], vec!["1", "0.5"]]);
        assert!(out.csv("bad.csv", &["a"], &[vec![]]).is_err());
    }
}
