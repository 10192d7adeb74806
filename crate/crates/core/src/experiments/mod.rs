//! Scripted reproductions of the propositions and corollaries, each
//! producing a [`ResultTable`].
//!
//! Tables are deterministic functions of their configuration: numbers are
//! written with the shortest round-trip formatting, metadata carries no
//! timestamps or timings, and the file name embeds a hash of the metadata.

mod a1ap;
mod kalpha;
mod neg2;
mod sawyer;
mod thmneg1;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::logk;

pub use a1ap::{run_a1ap, A1ApConfig};
pub use kalpha::{run_kalpha, KalphaConfig};
pub use neg2::{neg2_partial_sum_logk, run_neg2, Neg2Config};
pub use sawyer::{run_sawyer_vs_strong, SawyerConfig};
pub use thmneg1::{run_thmneg1, ThmNeg1Config};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Inadmissible(format!("unknown output format `{s}` (csv or json)"))),
        }
    }
}

/// Rows of one experiment plus metadata and headline values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub k: u32,
    pub p: f64,
    /// Parameters, grids and seed.
    pub metadata: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Headline values: fitted slopes, verdicts, cross-check residuals.
    pub summary: BTreeMap<String, Value>,
}

impl ResultTable {
    pub fn new(experiment: &str, k: u32, p: f64, columns: &[&str]) -> Self {
        ResultTable {
            experiment: experiment.into(),
            k,
            p,
            metadata: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn headline(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose first column equals `section`.
    pub fn section<'a>(&'a self, section: &'a str) -> impl Iterator<Item = &'a Vec<Cell>> + 'a {
        self.rows
            .iter()
            .filter(move |r| matches!(&r[0], Cell::Text(s) if s == section))
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    /// Columns named `*_logk` converted to linear values, suffix dropped.
    pub fn to_linear(&self) -> ResultTable {
        let mut out = self.clone();
        let k = self.k;
        let logk_cols: Vec<usize> = (0..self.columns.len())
            .filter(|&i| self.columns[i].ends_with("_logk"))
            .collect();
        for &i in &logk_cols {
            out.columns[i] = self.columns[i].trim_end_matches("_logk").to_string();
        }
        for row in &mut out.rows {
            for &i in &logk_cols {
                if let Cell::Real(x) = row[i] {
                    row[i] = Cell::Real(logk::to_linear(k, x));
                }
            }
        }
        out
    }

    /// Hex digest of the experiment name and metadata.
    pub fn config_hash(&self) -> String {
        content_hash(&[
            self.experiment.as_bytes(),
            &serde_json::to_vec(&self.metadata).expect("serializable"),
        ])
    }

    /// `<experiment>_<k>_<p>_<hash>.<ext>`.
    pub fn file_name(&self, format: Format) -> String {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        format!(
            "{}_{}_{}_{}.{ext}",
            self.experiment,
            self.k,
            format_real(self.p),
            self.config_hash()
        )
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Write into `dir` through a temporary file and rename.
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name(format));
        write_atomic(&path, self.render(format)?.as_bytes())?;
        Ok(path)
    }
}

/// First 16 hex digits of the SHA-256 of the concatenated parts.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for part in parts {
        h.update(part);
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Fail an experiment whose independent cross-check disagrees.
pub(crate) fn cross_check(what: &str, a: f64, b: f64, tol: f64) -> Result<f64> {
    let scale = a.abs().max(b.abs()).max(1e-300);
    let rel = (a - b).abs() / scale;
    if !(rel <= tol) && a != b {
        return Err(Error::OracleMismatch(format!(
            "cross-check {what} failed: {a} vs {b} (relative {rel})"
        )));
    }
    Ok(if a == b { 0.0 } else { rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let mut t = ResultTable::new("demo", 2, 2.0, &["section", "j", "value_logk"]);
        t.meta("j_max", 3);
        t.push(vec!["a".into(), 1usize.into(), 3.0.into()]);
        t.push(vec!["b, c".into(), 2usize.into(), f64::NEG_INFINITY.into()]);
        t
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let csv = table().to_csv().unwrap();
        assert_eq!(csv, "section,j,value_logk\na,1,3\n\"b, c\",2,-inf\n");
        let lin = table().to_linear().to_csv().unwrap();
        assert_eq!(lin, "section,j,value\na,1,8\n\"b, c\",2,0\n");
    }

    #[test]
    fn names_depend_on_metadata_only() {
        let a = table();
        let mut b = table();
        b.push(vec!["x".into(), 0usize.into(), 0.0.into()]);
        assert_eq!(a.file_name(Format::Csv), b.file_name(Format::Csv));
        let mut c = table();
        c.meta("j_max", 4);
        assert_ne!(a.file_name(Format::Csv), c.file_name(Format::Csv));
        assert!(a.file_name(Format::Csv).starts_with("demo_2_2_"));
    }

    #[test]
    fn json_round_trip() {
        let t = table();
        let mut u = t.clone();
        u.rows.pop();
        let back: ResultTable = serde_json::from_str(&u.to_json().unwrap()).unwrap();
        assert_eq!(back, u);
    }
}
