//! Report persistence: one header line `# <json>` followed by CSV rows.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};

const HEADER_PREFIX: &str = "# ";

/// One comparison: estimate ± se against a theoretical value. `band` is the
/// tolerance actually applied, so `pass ⇔ |estimate − theory| ≤ band`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub theory: f64,
    pub zscore: f64,
    pub band: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(name: impl Into<String>, estimate: f64, se: f64, theory: f64, band: f64) -> Self {
        let floor = 1e-9 * (1.0 + theory.abs());
        Self {
            name: name.into(),
            estimate,
            se,
            theory,
            zscore: crate::stats::zscore(estimate, theory, se),
            band,
            pass: (estimate - theory).abs() <= band + floor,
        }
    }

    /// A row whose pass flag is decided elsewhere (e.g. a joint complex test).
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub workers: usize,
    pub wall_clock_secs: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// The CSV body alone (no header line), used for reproducibility checks.
    pub fn csv_body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(HEADER_PREFIX);
        out.push_str(&serde_json::to_string(&self.header)?);
        out.push('\n');
        if self.rows.is_empty() {
            out.push_str("name,estimate,se,theory,zscore,band,pass\n");
        }
        out.push_str(&self.csv_body()?);
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read(BufReader::new(text.as_bytes()))
    }

    fn read(mut reader: impl BufRead) -> Result<Self> {
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let json = first
            .trim_end_matches(['\n', '\r'])
            .strip_prefix(HEADER_PREFIX)
            .ok_or_else(|| Error::Schema("report does not start with a header line".into()))?;
        let header: ReportHeader = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "report schema version {} (expected {SCHEMA_VERSION})",
                header.schema_version
            )));
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn persist(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(std::fs::File::open(path)?))
    }
}
