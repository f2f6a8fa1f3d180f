//! Writing outputs and checking them by reading them back.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use linesift::classifier::TrainConfig;
use linesift::corpus::load_corpus;
use linesift::downstream::RemovalConfig;
use linesift::features::FeatureConfig;
use linesift::Corpus;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG: &str = "resolved-config.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// Directory that holds `path`; `.` for a bare file name.
pub fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn ensure_parent(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn invalid(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Validation {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes `value` as pretty JSON and checks that it parses back to the same value.
pub fn write_json<T: Serialize + DeserializeOwned + PartialEq>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| invalid(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)?;
    let back = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: T = serde_json::from_str(&back).map_err(|e| invalid(path, e.to_string()))?;
    if &parsed != value {
        return Err(invalid(path, "content differs after reading it back"));
    }
    Ok(())
}

/// Writes a CSV and checks the header and that every row has as many fields.
pub fn write_csv(path: &Path, text: &str, expected_rows: usize) -> CliResult<()> {
    write_text(path, text)?;
    let back = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = back.lines();
    let header = lines.next().ok_or_else(|| invalid(path, "missing header"))?;
    let width = header.split(',').count();
    let mut rows = 0;
    for (i, l) in lines.enumerate() {
        if l.split(',').count() != width {
            return Err(invalid(path, format!("row {} has the wrong number of fields", i + 1)));
        }
        rows += 1;
    }
    if rows != expected_rows {
        return Err(invalid(path, format!("expected {expected_rows} rows, found {rows}")));
    }
    Ok(())
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> CliResult<()> {
    write_text(path, &corpus.to_jsonl())?;
    let back = load_corpus(path).map_err(|e| invalid(path, e.to_string()))?;
    if &back != corpus {
        return Err(invalid(path, "content differs after reading it back"));
    }
    Ok(())
}

/// Feature switches as recorded in the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FeatureFlags {
    pub ngram: bool,
    pub syntax: bool,
    pub table_layout: bool,
    pub embedding: bool,
    pub sequential: bool,
    pub layout_bins: usize,
    pub raw_edit_distance: bool,
}

impl From<&FeatureConfig> for FeatureFlags {
    fn from(c: &FeatureConfig) -> Self {
        FeatureFlags {
            ngram: c.use_ngram,
            syntax: c.use_syntax,
            table_layout: c.use_table_layout,
            embedding: c.use_embedding,
            sequential: c.use_sequential,
            layout_bins: c.layout_bins,
            raw_edit_distance: c.raw_edit_distance,
        }
    }
}

/// Everything a run was configured with, after defaults were applied.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureFlags>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removal: Option<RemovalConfig>,
    /// Command-specific settings not covered above.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64) -> Self {
        RunConfig {
            command: command.to_string(),
            seed,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            features: None,
            train: None,
            cv_folds: None,
            removal: None,
            params: BTreeMap::new(),
        }
    }

    pub fn input(mut self, name: &str, path: &Path) -> Self {
        self.inputs.insert(name.to_string(), path.to_path_buf());
        self
    }

    pub fn output(mut self, name: &str, path: &Path) -> Self {
        self.outputs.insert(name.to_string(), path.to_path_buf());
        self
    }

    pub fn param(mut self, name: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("plain values serialize");
        self.params.insert(name.to_string(), v);
        self
    }

    /// Writes `resolved-config.json` into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(RESOLVED_CONFIG);
        write_json(&path, self)?;
        Ok(path)
    }
}
