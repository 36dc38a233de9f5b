//! Deterministic tabular output: CSV serialization, the in-memory output
//! set, and the run manifest.
//!
//! All floats are formatted with 17 significant digits so that identical
//! runs are byte-identical and the determinism contract is testable. Files
//! are accumulated in memory and written together; the manifest (with
//! per-file SHA-256 digests) is written atomically last, so a directory
//! containing a manifest always contains exactly the files it describes.

use crate::config::RunConfig;
use crate::error::Result;
use crate::experiments::ScanRow;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

/// 17-significant-digit float formatting used in every CSV payload.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table under construction. No quoting is needed: every payload is
/// numeric and headers are plain identifiers.
#[derive(Clone, Debug)]
pub struct Csv {
    header: Vec<String>,
    lines: Vec<String>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv {
            header: columns.iter().map(|c| c.to_string()).collect(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.header.len());
        let line = values
            .iter()
            .map(|&v| format_float(v))
            .collect::<Vec<_>>()
            .join(",");
        self.lines.push(line);
    }

    /// Row with preformatted cells (for integer-valued columns).
    pub fn push_raw(&mut self, values: &[String]) {
        debug_assert_eq!(values.len(), self.header.len());
        self.lines.push(values.join(","));
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Serialize scan rows sharing a key set into a CSV with the given columns.
pub fn scan_rows_csv(rows: &[ScanRow], columns: &[&str]) -> Csv {
    let mut csv = Csv::new(columns);
    for row in rows {
        let values: Vec<f64> = columns
            .iter()
            .map(|c| row.get(c).unwrap_or(f64::NAN))
            .collect();
        csv.push(&values);
    }
    csv
}

/// Output files of one run, accumulated in memory and written together.
#[derive(Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new() -> Self {
        OutputSet::default()
    }

    pub fn add(&mut self, name: &str, contents: String) {
        debug_assert!(self.files.iter().all(|(n, _)| n != name));
        self.files.push((name.to_string(), contents));
    }

    pub fn add_csv(&mut self, name: &str, csv: &Csv) {
        self.add(name, csv.to_text());
    }

    pub fn files(&self) -> &[(String, String)] {
        &self.files
    }

    /// Write every file, then the manifest atomically last.
    pub fn write_all(
        &self,
        out_dir: &Path,
        config: &RunConfig,
        duration_seconds: f64,
    ) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        let mut digests = serde_json::Map::new();
        for (name, contents) in &self.files {
            fs::write(out_dir.join(name), contents)?;
            let digest = Sha256::digest(contents.as_bytes());
            digests.insert(
                name.clone(),
                serde_json::Value::String(format!("sha256:{digest:x}")),
            );
        }

        let mut config_echo = serde_json::Map::new();
        for (k, v) in config.echo() {
            config_echo.insert(k, serde_json::Value::String(v));
        }
        let manifest = serde_json::json!({
            "config": config_echo,
            "version": crate::VERSION,
            "duration_seconds": duration_seconds,
            "files": digests,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest is valid JSON");

        let tmp = out_dir.join("manifest.json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, out_dir.join("manifest.json"))?;
        Ok(())
    }
}
