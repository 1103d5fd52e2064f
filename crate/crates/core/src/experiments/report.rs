//! Suite reports: JSON for the aggregate record, CSV for per-sample rows.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Identifier of the report layout, bumped on incompatible changes.
pub const SCHEMA_ID: &str = "specular-report/1";

/// First 16 hex digits of the SHA-256 of the little-endian bytes of `values`.
pub fn digest(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Digest of a text blob (used for configs).
pub fn digest_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One measured inequality `lhs ≤ rhs` (or a tolerance check written in that
/// form). Inapplicable rows record samples excluded by a hypothesis and never
/// count as failures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub inputs_digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub mandatory: bool,
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl CheckRow {
    /// `lhs ≤ rhs`.
    pub fn bound(check: impl Into<String>, inputs_digest: String, lhs: f64, rhs: f64) -> Self {
        CheckRow {
            check: check.into(),
            inputs_digest,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            pass: lhs <= rhs,
            mandatory: true,
            applicable: true,
            note: String::new(),
        }
    }

    /// `|value − target| ≤ tolerance`, with `lhs = value`, `rhs = target`.
    pub fn within(check: impl Into<String>, inputs_digest: String, value: f64, target: f64, tolerance: f64) -> Self {
        let mut row = Self::bound(check, inputs_digest, value, target);
        row.pass = (value - target).abs() <= tolerance;
        row.note = format!("tolerance {tolerance:e}");
        row
    }

    /// A fraction `lhs` that must reach `rhs`.
    pub fn at_least(check: impl Into<String>, inputs_digest: String, lhs: f64, rhs: f64) -> Self {
        let mut row = Self::bound(check, inputs_digest, lhs, rhs);
        row.pass = lhs >= rhs;
        row
    }

    pub fn inapplicable(check: impl Into<String>, inputs_digest: String, note: impl Into<String>) -> Self {
        CheckRow {
            check: check.into(),
            inputs_digest,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            pass: false,
            mandatory: false,
            applicable: false,
            note: note.into(),
        }
    }

    /// Reported but not part of the verdict.
    pub fn optional(mut self) -> Self {
        self.mandatory = false;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Passed, or excluded from the verdict.
    pub fn ok(&self) -> bool {
        self.pass || !self.mandatory || !self.applicable
    }
}

/// A constant or exponent fitted from samples, with its value after doubling
/// the sampling and grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub refined_value: f64,
    /// `|refined − value| / |value|`.
    pub refinement_delta: f64,
    pub tolerance: f64,
    /// Admissible range for the refined value, when one is claimed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    pub pass: bool,
    pub mandatory: bool,
}

impl FittedConstant {
    pub fn new(name: impl Into<String>, value: f64, refined_value: f64, tolerance: f64) -> Self {
        let refinement_delta = if value != 0.0 {
            (refined_value - value).abs() / value.abs()
        } else if refined_value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        FittedConstant {
            name: name.into(),
            value,
            refined_value,
            refinement_delta,
            tolerance,
            range: None,
            pass: value.is_finite() && refined_value.is_finite() && refinement_delta <= tolerance,
            mandatory: true,
        }
    }

    /// Also require the refined value to lie in `[lo, hi]`.
    pub fn in_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some([lo, hi]);
        self.pass &= self.refined_value >= lo && self.refined_value <= hi;
        self
    }

    pub fn optional(mut self) -> Self {
        self.mandatory = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub suite: String,
    pub seed: u64,
    pub config_digest: String,
    pub rows: Vec<CheckRow>,
    pub fitted: Vec<FittedConstant>,
    /// Named scalar summaries (pass fractions, counts, fitted slopes).
    pub stats: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Only filled in when timing is requested.
    pub wall_time_ms: Option<u64>,
    /// Per-sample rows, written to CSV rather than JSON.
    #[serde(skip)]
    pub samples: Vec<CheckRow>,
}

impl ExperimentReport {
    pub fn new(suite: &str, seed: u64, config_digest: String) -> Self {
        ExperimentReport {
            schema: SCHEMA_ID.to_string(),
            suite: suite.to_string(),
            seed,
            config_digest,
            rows: Vec::new(),
            fitted: Vec::new(),
            stats: BTreeMap::new(),
            verdict: Verdict::Fail,
            wall_time_ms: None,
            samples: Vec::new(),
        }
    }

    pub fn stat(&mut self, name: &str, value: f64) {
        self.stats.insert(name.to_string(), value);
    }

    /// Sets the verdict: pass iff every mandatory applicable row and every
    /// mandatory fitted constant passes.
    pub fn finalize(&mut self) {
        let rows_ok = self.rows.iter().all(CheckRow::ok);
        let fits_ok = self.fitted.iter().all(|f| f.pass || !f.mandatory);
        self.verdict = if rows_ok && fits_ok { Verdict::Pass } else { Verdict::Fail };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    pub fn fitted_constant(&self, name: &str) -> Option<&FittedConstant> {
        self.fitted.iter().find(|f| f.name == name)
    }

    /// Failing mandatory rows and constants, by name.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.rows.iter().filter(|r| !r.ok()).map(|r| r.check.clone()).collect();
        out.extend(self.fitted.iter().filter(|f| f.mandatory && !f.pass).map(|f| f.name.clone()));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Per-sample rows as CSV (aggregate rows when there are no samples).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = if self.samples.is_empty() { &self.rows } else { &self.samples };
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        for r in rows {
            w.serialize(CsvRecord::from(r)).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A [`CheckRow`] with every column present, so that CSV records have a
/// fixed width.
#[derive(Serialize)]
struct CsvRecord<'a> {
    check: &'a str,
    inputs_digest: &'a str,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    pass: bool,
    mandatory: bool,
    applicable: bool,
    note: &'a str,
}

impl<'a> From<&'a CheckRow> for CsvRecord<'a> {
    fn from(r: &'a CheckRow) -> Self {
        CsvRecord {
            check: &r.check,
            inputs_digest: &r.inputs_digest,
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio,
            pass: r.pass,
            mandatory: r.mandatory,
            applicable: r.applicable,
            note: &r.note,
        }
    }
}
