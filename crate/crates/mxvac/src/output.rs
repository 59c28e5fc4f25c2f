//! Distribution tables (`j, value, source, stderr`) and JSON summaries.

use std::fs;
use std::path::{Path, PathBuf};

use mxvac_core::report::Provenance;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub j: usize,
    pub value: f64,
    pub source: String,
    pub stderr: Option<f64>,
}

pub fn rows(values: &[f64], source: Provenance, stderr: Option<&[f64]>) -> Vec<Row> {
    values
        .iter()
        .enumerate()
        .map(|(j, v)| Row {
            j,
            value: *v,
            source: source.as_str().to_string(),
            stderr: stderr.and_then(|s| s.get(j).copied()),
        })
        .collect()
}

pub fn write_table(dir: &Path, name: &str, rows: &[Row], format: Format) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(&path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => fs::write(&path, serde_json::to_string_pretty(rows)? + "\n")?,
    }
    Ok(path)
}

/// Reads a table written by [`write_table`], choosing the parser by extension.
pub fn read_table(path: &Path) -> Result<Vec<Row>, CliError> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.display().to_string()));
    }
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    } else {
        let mut r = csv::Reader::from_path(path)?;
        Ok(r.deserialize().collect::<Result<_, _>>()?)
    }
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

/// Dense vector from rows, indexed by `j`.
pub fn dense(rows: &[Row]) -> (Vec<f64>, Option<Vec<f64>>) {
    let len = rows.iter().map(|r| r.j + 1).max().unwrap_or(0);
    let mut v = vec![0.0; len];
    let mut se = vec![0.0; len];
    let mut any_se = false;
    for r in rows {
        v[r.j] = r.value;
        if let Some(s) = r.stderr {
            se[r.j] = s;
            any_se = true;
        }
    }
    (v, any_se.then_some(se))
}
