//! Report files. CSV runs write one file per table plus a JSON summary;
//! JSON runs write a single document holding both.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::suites::SuiteReport;

pub fn write_report(dir: &Path, format: Format, report: &SuiteReport) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let suite = &report.summary.suite;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> io::Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    match format {
        Format::Csv => {
            for (name, t) in &report.tables {
                put(format!("{suite}_{name}.csv"), t.to_string_lossy())?;
            }
            put(format!("{suite}_summary.json"), report.summary.to_json() + "\n")?;
        }
        Format::Json => {
            let mut tables = Map::new();
            for (name, t) in &report.tables {
                tables.insert(name.clone(), json!({ "header": t.header, "rows": t.rows }));
            }
            let mut doc = serde_json::to_value(&report.summary).expect("summary serializes");
            doc["tables"] = Value::Object(tables);
            put(format!("{suite}.json"), serde_json::to_string_pretty(&doc).expect("json") + "\n")?;
        }
    }
    for (name, body) in &report.files {
        put(name.clone(), body.clone())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use latlab::report::{CsvTable, RunSummary, VerificationRow};

    fn empty() -> SuiteReport {
        SuiteReport {
            summary: RunSummary {
                suite: "theorem4".into(),
                grid: vec![],
                criteria: vec![],
                partial: false,
                provenance: Value::Null,
            },
            tables: vec![("verification".into(), VerificationRow::table(&[]))],
            files: vec![],
        }
    }

    #[test]
    fn empty_results_give_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        write_report(dir.path(), Format::Csv, &empty()).unwrap();
        let body = fs::read_to_string(dir.path().join("theorem4_verification.csv")).unwrap();
        assert_eq!(body, "parameter,lhs,rhs,residual,tail_bound\n");
    }

    #[test]
    fn json_holds_tables_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = empty();
        let mut t = CsvTable::new(&["a"]);
        t.push(vec!["1".into()]);
        r.tables.push(("extra".into(), t));
        write_report(dir.path(), Format::Json, &r).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("theorem4.json")).unwrap()).unwrap();
        assert_eq!(v["suite"], "theorem4");
        assert_eq!(v["tables"]["extra"]["rows"][0][0], "1");
    }
}
