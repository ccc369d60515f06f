//! Structured scan results with JSON and CSV output.
//!
//! All floating-point numbers are written with 17 significant digits so that a
//! report can be compared bit-for-bit across runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{GeomError, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_number(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() { fmt_f64(v) } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scalars(BTreeMap<String, f64>);

impl Serialize for Scalars {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &json_number(*v))?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    pub records: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A table written next to the report as `<name>.<table>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(|e| GeomError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| GeomError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| GeomError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GeomError::Io(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub scalars: Scalars,
    pub witnesses: Vec<Witness>,
    pub assertions: Vec<Assertion>,
    pub wall_time_s: f64,
    pub tables: Vec<Table>,
}

impl ScanReport {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ScanReport {
            experiment: experiment.to_string(),
            seed,
            config: BTreeMap::new(),
            scalars: Scalars::default(),
            witnesses: Vec::new(),
            assertions: Vec::new(),
            wall_time_s: 0.0,
            tables: Vec::new(),
        }
    }

    pub fn echo(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.scalars.0.insert(key.to_string(), value);
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.scalars.0.get(key).copied()
    }

    pub fn scalars(&self) -> &BTreeMap<String, f64> {
        &self.scalars.0
    }

    pub fn witness(&mut self, label: &str, records: Vec<String>) {
        self.witnesses.push(Witness { label: label.to_string(), records });
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    /// Folds another report's scalars, witnesses, assertions and tables into
    /// this one, prefixing names with `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ScanReport) {
        for (k, v) in other.scalars.0 {
            self.scalars.0.insert(format!("{prefix}.{k}"), v);
        }
        for w in other.witnesses {
            self.witnesses.push(Witness { label: format!("{prefix}.{}", w.label), records: w.records });
        }
        for a in other.assertions {
            self.assertions.push(Assertion { name: format!("{prefix}.{}", a.name), ..a });
        }
        for t in other.tables {
            self.tables.push(Table { name: format!("{prefix}-{}", t.name), ..t });
        }
    }

    /// The scalar section alone, as it appears in the JSON report.
    pub fn scalar_json(&self) -> String {
        serde_json::to_string_pretty(&self.scalars).expect("scalars serialize")
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            experiment: &'a str,
            seed: u64,
            config: &'a BTreeMap<String, String>,
            scalars: &'a Scalars,
            witnesses: &'a [Witness],
            assertions: &'a [Assertion],
            wall_time_s: Box<RawValue>,
            passed: bool,
        }
        let inner = Inner {
            experiment: &self.experiment,
            seed: self.seed,
            config: &self.config,
            scalars: &self.scalars,
            witnesses: &self.witnesses,
            assertions: &self.assertions,
            wall_time_s: json_number(self.wall_time_s),
            passed: self.passed(),
        };
        serde_json::to_string_pretty(&inner).expect("report serializes")
    }

    /// Writes `<name>.report.json` and one CSV per table into `dir`, each
    /// atomically (temp file, then rename). Returns the written paths.
    pub fn write(&self, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = vec![write_atomic(&dir.join(format!("{name}.report.json")), &self.to_json())?];
        for t in &self.tables {
            written.push(write_atomic(&dir.join(format!("{name}.{}.csv", t.name)), &t.to_csv()?)?);
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let file_name = path
        .file_name()
        .ok_or_else(|| GeomError::Io(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .to_string();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_17_significant_digits() {
        let mut r = ScanReport::new("x", 3);
        r.set("a", 0.1);
        r.set("b", f64::NAN);
        let json = r.to_json();
        assert!(json.contains("\"a\": 1.0000000000000001e-1"), "{json}");
        assert!(json.contains("\"b\": null"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["scalars"]["a"].as_f64(), Some(0.1));
        assert_eq!(v["passed"], serde_json::Value::Bool(true));
    }

    #[test]
    fn failures_are_reported() {
        let mut r = ScanReport::new("x", 0);
        r.check("ok", true, "");
        r.check("bad", false, "value too small");
        assert!(!r.passed());
        assert_eq!(r.failures()[0].name, "bad");
    }

    #[test]
    fn atomic_write_and_tables() {
        let dir = std::env::temp_dir().join(format!("cmpgeom-report-{}", std::process::id()));
        let mut r = ScanReport::new("x", 0);
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        r.tables.push(t);
        let paths = r.write(&dir, "x").unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(fs::read_to_string(&paths[1]).unwrap(), "a,b\n1,2\n");
        fs::remove_dir_all(dir).unwrap();
    }
}
