//! On-disk results of one scenario run:
//!
//! ```text
//! <dir>/manifest.json        run id, input hash, stage ledger
//! <dir>/config.txt           canonical configuration (hashed)
//! <dir>/records/<stage>.json one record per completed stage
//! <dir>/failure.json         only when a stage failed
//! <dir>/<table>.csv          tables
//! <dir>/plots/<name>.svg     plots
//! ```

use crate::config::{ScenarioConfig, Stage};
use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// First 16 hex digits of `input_hash`: identical inputs share an id.
    pub run_id: String,
    pub scenario: String,
    /// SHA-256 of `config.txt`.
    pub input_hash: String,
    pub seed: u64,
    /// Planned stages, in order.
    pub stages: Vec<String>,
    pub completed: Vec<String>,
    pub tables: Vec<String>,
    pub plots: Vec<String>,
    pub failure: Option<Failure>,
}

/// A CSV table; numbers are written in Rust's shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
        Ok(Self { name, columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Numeric column; unparsable cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .map(|s| s.parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

#[derive(Debug)]
pub struct ResultStore {
    pub dir: PathBuf,
    pub manifest: Manifest,
    records: BTreeMap<String, serde_json::Value>,
}

fn store_err(dir: &Path, message: impl Into<String>) -> Error {
    Error::Store {
        path: dir.to_path_buf(),
        message: message.into(),
    }
}

impl ResultStore {
    /// Starts a fresh store for `cfg` in `cfg.output`. Files listed by an
    /// earlier manifest in the same directory are removed first.
    pub fn create(cfg: &ScenarioConfig, stages: &[Stage]) -> Result<Self> {
        let dir = cfg.output.clone();
        fs::create_dir_all(dir.join("records"))?;
        if let Ok(old) = Self::open(&dir) {
            old.remove_outputs()?;
        }
        let text = cfg.to_text();
        let input_hash = cfg.hash();
        fs::write(dir.join("config.txt"), &text)?;
        let store = Self {
            manifest: Manifest {
                run_id: input_hash[..16].to_string(),
                scenario: cfg.name.clone(),
                input_hash,
                seed: cfg.seed,
                stages: stages.iter().map(|s| s.name().to_string()).collect(),
                completed: Vec::new(),
                tables: Vec::new(),
                plots: Vec::new(),
                failure: None,
            },
            dir,
            records: BTreeMap::new(),
        };
        store.flush()?;
        Ok(store)
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join("manifest.json")).map_err(|e| store_err(dir, format!("no manifest: {e}")))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        let mut records = BTreeMap::new();
        for stage in &manifest.completed {
            let body = fs::read_to_string(dir.join("records").join(format!("{stage}.json")))?;
            records.insert(stage.clone(), serde_json::from_str(&body)?);
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            records,
        })
    }

    fn remove_outputs(&self) -> Result<()> {
        let mut files: Vec<PathBuf> = self
            .manifest
            .completed
            .iter()
            .map(|s| self.dir.join("records").join(format!("{s}.json")))
            .collect();
        files.extend(self.manifest.tables.iter().map(|t| self.dir.join(t)));
        files.extend(self.manifest.plots.iter().map(|p| self.dir.join(p)));
        files.push(self.dir.join("failure.json"));
        for f in files {
            match fs::remove_file(&f) {
                Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
                _ => {}
            }
        }
        Ok(())
    }

    fn flush(&self) -> Result<()> {
        let mut body = serde_json::to_string_pretty(&self.manifest)?;
        body.push('\n');
        fs::write(self.dir.join("manifest.json"), body)?;
        Ok(())
    }

    /// Appends the record of `stage`; a stage can only be recorded once.
    pub fn record<T: Serialize>(&mut self, stage: Stage, value: &T) -> Result<()> {
        let name = stage.name().to_string();
        if self.records.contains_key(&name) {
            return Err(store_err(&self.dir, format!("record `{name}` already exists (records are append-only)")));
        }
        let value = serde_json::to_value(value)?;
        let mut body = serde_json::to_string_pretty(&value)?;
        body.push('\n');
        fs::write(self.dir.join("records").join(format!("{name}.json")), body)?;
        self.records.insert(name.clone(), value);
        self.manifest.completed.push(name);
        self.flush()
    }

    pub fn get(&self, stage: Stage) -> Option<&serde_json::Value> {
        self.records.get(stage.name())
    }

    /// The record of `stage` decoded as `T`.
    pub fn read<T: DeserializeOwned>(&self, stage: Stage) -> Result<T> {
        let v = self
            .get(stage)
            .ok_or_else(|| store_err(&self.dir, format!("no record for stage `{stage}`")))?;
        Ok(T::deserialize(v)?)
    }

    pub fn write_table(&mut self, table: &Table) -> Result<PathBuf> {
        let name = table.file_name();
        let path = self.dir.join(&name);
        fs::write(&path, table.to_csv()?)?;
        if !self.manifest.tables.contains(&name) {
            self.manifest.tables.push(name);
            self.flush()?;
        }
        Ok(path)
    }

    pub fn table(&self, name: &str) -> Option<Table> {
        let file = format!("{name}.csv");
        self.manifest
            .tables
            .contains(&file)
            .then(|| Table::read(&self.dir.join(file)).ok())
            .flatten()
    }

    /// Writes (or rewrites) `plots/<name>.svg`.
    pub fn write_plot(&mut self, name: &str, svg: &str) -> Result<PathBuf> {
        fs::create_dir_all(self.dir.join("plots"))?;
        let rel = format!("plots/{name}.svg");
        let path = self.dir.join(&rel);
        fs::write(&path, svg)?;
        if !self.manifest.plots.contains(&rel) {
            self.manifest.plots.push(rel);
            self.flush()?;
        }
        Ok(path)
    }

    /// Records the failing stage; everything written so far is kept.
    pub fn fail(&mut self, stage: Stage, message: &str) -> Result<()> {
        let failure = Failure {
            stage: stage.name().into(),
            message: message.into(),
        };
        let mut body = serde_json::to_string_pretty(&failure)?;
        body.push('\n');
        fs::write(self.dir.join("failure.json"), body)?;
        self.manifest.failure = Some(failure);
        self.flush()
    }

    /// Re-parses `config.txt` and checks that its canonical form hashes to
    /// the manifest's input hash.
    pub fn verify_hash(&self) -> Result<bool> {
        let text = fs::read_to_string(self.dir.join("config.txt"))?;
        let cfg = ScenarioConfig::parse(&text)?;
        Ok(cfg.to_text() == text && cfg.hash() == self.manifest.input_hash)
    }
}
