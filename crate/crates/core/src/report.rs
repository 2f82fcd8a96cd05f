//! Deterministic CSV/JSON report assembly.

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Fixed 12-significant-digit formatting; scientific notation outside
/// [1e-4, 1e8).
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e8).contains(&a) {
        let mag = a.log10().floor() as i32;
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding can carry into a new digit (9.99…→10.0); re-derive once
        let digits = s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
        if digits > 12 && decimals > 0 {
            let d = decimals - 1;
            return format!("{v:.d$}");
        }
        s
    } else {
        format!("{v:.11e}")
    }
}

/// An ordered table written as CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8_lossy(&buf).into_owned()
    }
}

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tail_bound: f64,
}

impl VerificationRow {
    pub const HEADER: [&'static str; 5] = ["parameter", "lhs", "rhs", "residual", "tail_bound"];

    pub fn table(rows: &[VerificationRow]) -> CsvTable {
        let mut t = CsvTable::new(&Self::HEADER);
        for r in rows {
            t.push(vec![
                fmt_num(r.parameter),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.residual),
                fmt_num(r.tail_bound),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// JSON summary of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub suite: String,
    pub grid: Vec<f64>,
    pub criteria: Vec<CriterionOutcome>,
    /// Set when the run stopped early on its budget.
    pub partial: bool,
    pub provenance: serde_json::Value,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
