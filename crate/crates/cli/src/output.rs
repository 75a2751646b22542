//! Artifact writer: CSV files plus `manifest.json` and `residuals.json`.

use std::path::{Path, PathBuf};

use entropic::report::Residual;
use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    experiment: &'a str,
    code_version: &'a str,
    parameters: &'a P,
    files: &'a [FileEntry],
}

#[derive(Serialize)]
struct ResidualReport<'a> {
    experiment: &'a str,
    all_passed: bool,
    checks: &'a [Residual],
    missing: &'a [String],
    notes: &'a [String],
}

pub struct Sink {
    dir: PathBuf,
    files: Vec<FileEntry>,
    pub checks: Vec<Residual>,
    pub notes: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::Io { path, source: e })?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: content.len(),
        });
        Ok(())
    }

    pub fn check(&mut self, r: Residual) {
        self.checks.push(r);
    }

    /// Writes the residual report and the manifest; returns whether every
    /// check passed and every expected identity was exercised.
    pub fn finish<P: Serialize>(
        mut self,
        experiment: &str,
        parameters: &P,
        expected: &[&str],
    ) -> Result<bool, CliError> {
        let missing: Vec<String> = expected
            .iter()
            .filter(|e| !self.checks.iter().any(|c| c.identity == **e))
            .map(|e| e.to_string())
            .collect();
        let all_passed = missing.is_empty() && self.checks.iter().all(|c| c.passed);
        let report = ResidualReport {
            experiment,
            all_passed,
            checks: &self.checks,
            missing: &missing,
            notes: &self.notes,
        };
        let text = to_json(&report)?;
        self.write("residuals.json", &text)?;
        let manifest = Manifest {
            experiment,
            code_version: env!("CARGO_PKG_VERSION"),
            parameters,
            files: &self.files,
        };
        let text = to_json(&manifest)?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::Io { path, source: e })?;
        Ok(all_passed)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}
