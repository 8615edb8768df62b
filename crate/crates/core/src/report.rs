//! Matrix file format and JSON/CSV encodings of reports.
//!
//! Numbers are written in shortest round-trip form in both encodings, so a
//! value read back from either is bit-identical to the one computed.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, ContourCheck};
use crate::error::Error;
use crate::harness::{SharpnessRow, SuiteReport};
use crate::linalg::HermitianMatrix;

/// `{"n": 2, "data": [a11, a12, a21, a22]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<f64>,
}

impl From<&HermitianMatrix> for MatrixFile {
    fn from(m: &HermitianMatrix) -> Self {
        Self {
            n: m.dim(),
            data: m.to_row_major(),
        }
    }
}

impl TryFrom<&MatrixFile> for HermitianMatrix {
    type Error = Error;

    fn try_from(f: &MatrixFile) -> Result<Self, Error> {
        HermitianMatrix::from_row_major(f.n, &f.data)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid matrix in {path}: {source}")]
    Invalid { path: String, source: Error },
}

impl MatrixFileError {
    pub fn path(&self) -> &str {
        match self {
            Self::Io { path, .. } | Self::Parse { path, .. } | Self::Invalid { path, .. } => path,
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<HermitianMatrix, MatrixFileError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| MatrixFileError::Io {
        path: shown.clone(),
        source,
    })?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|source| MatrixFileError::Parse {
        path: shown.clone(),
        source,
    })?;
    HermitianMatrix::try_from(&file).map_err(|source| MatrixFileError::Invalid { path: shown, source })
}

pub fn write_matrix(path: &Path, m: &HermitianMatrix) -> std::io::Result<()> {
    let json = serde_json::to_string(&MatrixFile::from(m)).map_err(std::io::Error::other)?;
    std::fs::write(path, json)
}

/// Shortest round-trip decimal, identical to the JSON encoding. Non-finite
/// values become empty fields.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float serializes")
    } else {
        String::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Encodings shared by every report the CLI emits.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

impl Report for BoundReport {
    fn to_csv(&self) -> String {
        format!(
            "kind,r,m,norm_a,bound,lhs_min_eig,slack,tolerance,pass\n{},{},{},{},{},{},{},{},{}\n",
            self.kind.as_str(),
            fmt_opt(self.r),
            fmt_num(self.m),
            fmt_num(self.norm_a),
            fmt_num(self.bound),
            fmt_num(self.lhs_min_eig),
            fmt_num(self.slack),
            fmt_num(self.tolerance),
            self.pass
        )
    }
}

impl Report for ContourCheck {
    fn to_csv(&self) -> String {
        format!(
            "norm_a,m,r,closed_form,quadrature_value,rel_err\n{},{},{},{},{},{}\n",
            fmt_num(self.norm_a),
            fmt_num(self.m),
            fmt_num(self.r),
            fmt_num(self.closed_form),
            fmt_num(self.quadrature_value),
            fmt_num(self.rel_err)
        )
    }
}

impl Report for SuiteReport {
    /// Summary table, a blank line, then one row per failure.
    fn to_csv(&self) -> String {
        let mut out = String::from("seed,trials,total,passed,min_slack,min_scaled_slack,runtime_secs\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.seed,
            self.trials,
            self.total,
            self.passed,
            fmt_num(self.min_slack),
            fmt_num(self.min_scaled_slack),
            fmt_num(self.runtime_secs)
        );
        out.push_str("\ntrial,kind,r,slack,fingerprint,reason\n");
        for f in &self.failures {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f.trial,
                f.kind,
                fmt_opt(f.r),
                fmt_opt(f.slack),
                f.fingerprint,
                csv_field(f.reason.as_deref().unwrap_or(""))
            );
        }
        out
    }
}

/// Table of sharpness rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessTable {
    pub rows: Vec<SharpnessRow>,
    pub all_sharp: bool,
}

impl SharpnessTable {
    pub fn new(rows: Vec<SharpnessRow>) -> Self {
        let all_sharp = rows.iter().all(SharpnessRow::is_sharp);
        Self { rows, all_sharp }
    }
}

impl Report for SharpnessTable {
    fn to_csv(&self) -> String {
        let mut out = String::from("kind,a,m,r,lhs,bound,slack,note\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.kind.as_str(),
                fmt_num(row.a),
                fmt_num(row.m),
                fmt_opt(row.r),
                fmt_opt(row.lhs),
                fmt_opt(row.bound),
                fmt_opt(row.slack),
                csv_field(row.note.as_deref().unwrap_or(""))
            );
        }
        out
    }
}

/// All closed-form bounds for scalar `(||A||, m, r)`; a bound whose
/// preconditions fail is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTable {
    pub norm_a: f64,
    pub m: f64,
    pub r: f64,
    pub inverse: Option<f64>,
    pub power: Option<f64>,
    pub log: Option<f64>,
    pub contour_closed_form: Option<f64>,
}

impl Report for BoundsTable {
    fn to_csv(&self) -> String {
        format!(
            "norm_a,m,r,inverse,power,log,contour_closed_form\n{},{},{},{},{},{},{}\n",
            fmt_num(self.norm_a),
            fmt_num(self.m),
            fmt_num(self.r),
            fmt_opt(self.inverse),
            fmt_opt(self.power),
            fmt_opt(self.log),
            fmt_opt(self.contour_closed_form)
        )
    }
}

/// Result of a matrix function command together with its distance to the
/// spectral oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResult {
    pub command: String,
    pub r: Option<f64>,
    pub n_limit: Option<u64>,
    pub result: MatrixFile,
    /// Operator-norm distance to the spectral oracle.
    pub oracle_distance: f64,
}

impl Report for MatrixResult {
    /// One row per matrix entry.
    fn to_csv(&self) -> String {
        let mut out = format!(
            "command,r,n_limit,oracle_distance\n{},{},{},{}\n\nrow,col,value\n",
            self.command,
            fmt_opt(self.r),
            self.n_limit.map(|n| n.to_string()).unwrap_or_default(),
            fmt_num(self.oracle_distance)
        );
        let n = self.result.n;
        for (k, v) in self.result.data.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", k / n, k % n, fmt_num(*v));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub path: Option<String>,
}

impl Report for ErrorReport {
    fn to_csv(&self) -> String {
        format!(
            "error,path\n{},{}\n",
            csv_field(&self.error),
            csv_field(self.path.as_deref().unwrap_or(""))
        )
    }
}
