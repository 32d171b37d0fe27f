//! Artifact writers. Every file carries the library version and the
//! effective configuration: CSV files as leading `#` comment lines, JSON
//! files as top-level `version` and `config` fields.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Version string embedded in every artifact.
pub fn version_string() -> String {
    format!("lqr-iss {} (core {})", env!("CARGO_PKG_VERSION"), lqr_iss_core::VERSION)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: String,
    command: &'a str,
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub struct Artifacts<'a> {
    dir: PathBuf,
    command: &'a str,
    config: &'a ExperimentConfig,
}

impl<'a> Artifacts<'a> {
    pub fn create(config: &'a ExperimentConfig, command: &'a str) -> Result<Self> {
        let dir = config.output_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
        Ok(Self { dir, command, config })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `rows` under `header`, preceded by the comment block.
    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let echo = serde_json::to_string(self.config).map_err(|e| CliError::write(&path, e))?;
        let mut buf = Vec::new();
        writeln!(buf, "# {}", version_string()).expect("vec write");
        writeln!(buf, "# command: {}", self.command).expect("vec write");
        writeln!(buf, "# config: {echo}").expect("vec write");
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header).map_err(|e| CliError::write(&path, e))?;
            for row in rows {
                w.write_record(&row).map_err(|e| CliError::write(&path, e))?;
            }
            w.flush().map_err(|e| CliError::write(&path, e))?;
        }
        fs::write(&path, buf).map_err(|e| CliError::write(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let doc = Envelope {
            version: version_string(),
            command: self.command,
            config: self.config,
            result,
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::write(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::write(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Reads the data rows of a CSV artifact, skipping comment lines.
pub fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
