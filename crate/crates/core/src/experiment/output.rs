//! Run records and their on-disk form: one directory per run id holding
//! CSV tables, the resolved config and a JSON sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// A numeric table. `NaN` cells are written empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::shape(format!(
                "table {}: row has {} cells for {} columns",
                self.name,
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, header: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == header)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| if x.is_nan() { String::new() } else { format!("{x:?}") }))
                .map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub wall_time_s: f64,
    pub scalars: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
}

impl ExperimentRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentRecord {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            scalars: BTreeMap::new(),
            warnings: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.scalars.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.to_string(), value);
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Column counts match headers and the `series` table has strictly
    /// increasing times.
    pub fn check(&self) -> Result<()> {
        for t in &self.tables {
            if t.rows.iter().any(|r| r.len() != t.headers.len()) {
                return Err(Error::shape(format!("table {} has ragged rows", t.name)));
            }
        }
        if let Some(times) = self.table("series").and_then(|t| t.column("t")) {
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::domain("series times are not strictly increasing"));
            }
        }
        Ok(())
    }

    /// Writes `<out_dir>/<run_id>/` and returns its path.
    pub fn write(&self) -> Result<PathBuf> {
        self.check()?;
        let dir = Path::new(&self.config.out_dir).join(&self.config.run_id);
        fs::create_dir_all(&dir)?;
        for t in &self.tables {
            write_atomic(&dir.join(format!("{}.csv", t.name)), &t.to_csv()?)?;
        }
        write_atomic(&dir.join("config.txt"), self.config.to_text().as_bytes())?;
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(&dir.join("record.json"), &json)?;
        Ok(dir)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
