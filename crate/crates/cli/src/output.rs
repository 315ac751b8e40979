//! Output files: CSV tables, gnuplot data and the manifest.

use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

/// A flat table written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: &[&str]) -> Self {
        Table { file_name: file_name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Whitespace-delimited numeric columns for gnuplot, with `#` comments.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotTable {
    pub file_name: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str(&format!("# {}\n", self.columns.join(" ")));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Everything an experiment produces, in write order.
#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_table(&mut self, t: &Table) -> Result<(), csv::Error> {
        if !t.rows.is_empty() {
            let bytes = t.to_csv()?;
            self.add(t.file_name.clone(), bytes);
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

/// Adds one `.dat` file per plot table to `out`; an empty set adds nothing.
pub fn emit_plot_data(tables: &[PlotTable], out: &mut Outputs) {
    for t in tables {
        out.add(t.file_name.clone(), t.render().into_bytes());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub struct ManifestInfo<'a> {
    pub experiment: &'a str,
    pub config_bytes: &'a [u8],
    pub seed: u64,
    pub started: String,
}

/// Writes every output file plus `manifest.json` listing each with its
/// SHA-256.
pub fn write_outputs(out: &Outputs, dir: &Path, info: &ManifestInfo) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes)?;
        entries.push(json!({"path": name, "sha256": sha256_hex(bytes), "bytes": bytes.len()}));
    }
    let manifest = json!({
        "experiment": info.experiment,
        "config_sha256": sha256_hex(info.config_bytes),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": info.seed,
        "started": info.started,
        "finished": chrono::Utc::now().to_rfc3339(),
        "files": entries,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(dir.join("manifest.json"), text + "\n")
}
