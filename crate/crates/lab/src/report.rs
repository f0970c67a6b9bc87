//! Run reports and their JSON / CSV emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Short hex digest of the JSON form of `inputs`.
pub fn inputs_hash<S: Serialize + ?Sized>(inputs: &S) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    let d = Sha256::digest(&bytes);
    d.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One table row with its provenance. Non-finite values are stored as
/// `None`; a failed stage leaves its message in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub operation: String,
    pub inputs_hash: String,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; `inputs` is hashed for provenance.
    pub fn push<S: Serialize + ?Sized>(&mut self, operation: &str, inputs: &S, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(Row {
            operation: operation.into(),
            inputs_hash: inputs_hash(inputs),
            values: values.iter().map(|v| v.is_finite().then_some(*v)).collect(),
            error: None,
        });
    }

    /// Appends a row whose stage failed; `values` may be partial.
    pub fn push_error<S: Serialize + ?Sized>(&mut self, operation: &str, inputs: &S, values: &[f64], error: String) {
        let mut v: Vec<Option<f64>> = values.iter().map(|v| v.is_finite().then_some(*v)).collect();
        v.resize(self.columns.len(), None);
        self.rows.push(Row { operation: operation.into(), inputs_hash: inputs_hash(inputs), values: v, error: Some(error) });
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// Converts a core sweep table; flags become a trailing error-only row
    /// each.
    pub fn from_sweep(rep: &renormforge_core::report::SweepReport, operation: &str, inputs: &impl Serialize) -> Self {
        let cols: Vec<&str> = rep.columns.iter().map(String::as_str).collect();
        let mut t = Table::new(&rep.name, &cols);
        for r in &rep.rows {
            t.push(operation, &(inputs, r.first()), r);
        }
        for f in &rep.flags {
            t.push_error(operation, &(inputs, f), &[], f.clone());
        }
        t
    }
}

/// A pass/fail line against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    /// Human-readable condition, e.g. `< 1e-10`.
    pub threshold: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn below(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), value: value.is_finite().then_some(value), threshold: format!("< {bound:e}"), pass: value < bound, detail: detail.into() }
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: value.is_finite().then_some(value),
            threshold: format!("{target} ± {tol}"),
            pass: (value - target).abs() <= tol,
            detail: detail.into(),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), value: None, threshold: "holds".into(), pass, detail: detail.into() }
    }

    /// A check that could not be evaluated because a stage failed.
    pub fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self { name: name.into(), value: None, threshold: "-".into(), pass: false, detail: format!("stage error: {err}") }
    }

    /// One line for terminal output.
    pub fn line(&self) -> String {
        let v = self.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        format!("[{}] {:<34} value={v} threshold {}  {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.threshold, self.detail)
    }
}

/// A free-form per-stage record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub stage: String,
    pub data: serde_json::Value,
}

impl Trace {
    pub fn new<S: Serialize>(stage: &str, data: &S) -> Self {
        Self { stage: stage.into(), data: serde_json::to_value(data).unwrap_or(serde_json::Value::Null) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub traces: Vec<Trace>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_clock_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self { command: command.into(), config: config.clone(), traces: Vec::new(), tables: Vec::new(), checks: Vec::new(), pass: true, wall_clock_s: None }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV text of one table. The first line is a `# columns:` comment.
pub fn table_csv(t: &Table) -> String {
    let mut header = vec!["operation".to_string(), "inputs_hash".to_string()];
    header.extend(t.columns.iter().cloned());
    header.push("error".into());
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in &t.rows {
        let mut rec = vec![r.operation.clone(), r.inputs_hash.clone()];
        rec.extend(r.values.iter().map(|v| csv_cell(*v)));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    format!(
        "# columns: operation = producing operation; inputs_hash = sha256 prefix of the row inputs; {}; error = stage error if the row failed\n{body}",
        t.columns.join(", ")
    )
}

fn checks_csv(checks: &[Check]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["name", "value", "threshold", "pass", "detail"]).expect("in-memory write");
    for c in checks {
        w.write_record([c.name.clone(), csv_cell(c.value), c.threshold.clone(), c.pass.to_string(), c.detail.clone()]).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    format!("# columns: name, value, threshold, pass, detail\n{body}")
}

/// Writes `<command>.json` and/or one `<command>_<table>.csv` per table plus
/// `<command>_checks.csv`. Returns the written paths.
pub fn emit(report: &RunReport, formats: &[String], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let mut write = |name: String, text: &str| -> std::io::Result<()> {
        let p = dir.join(name);
        std::fs::File::create(&p)?.write_all(text.as_bytes())?;
        out.push(p);
        Ok(())
    };
    for f in formats {
        match f.as_str() {
            "json" => write(format!("{}.json", report.command), &report.to_json())?,
            "csv" => {
                for t in &report.tables {
                    write(format!("{}_{}.csv", report.command, t.name), &table_csv(t))?;
                }
                write(format!("{}_checks.csv", report.command), &checks_csv(&report.checks))?;
            }
            other => return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("unknown format {other}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("brjuno", &ExperimentConfig::default());
        let mut t = Table::new("partials", &["m", "y"]);
        t.push("brjuno_partials", &("golden", 0), &[0.0, 0.481_211_825_059_603_4]);
        t.push_error("brjuno_partials", &("golden", 1), &[1.0], "boom".into());
        r.tables.push(t);
        r.traces.push(Trace::new("setup", &vec![1.5, 2.5]));
        r.check(Check::below("y", 0.1, 1.0, ""));
        r
    }

    #[test]
    fn empty_table_gives_header_only_csv() {
        let t = Table::new("empty", &["a", "b"]);
        let text = table_csv(&t);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("# columns:"));
        assert_eq!(lines[1], "operation,inputs_hash,a,b,error");
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn hash_depends_on_inputs() {
        assert_eq!(inputs_hash(&(1, "a")), inputs_hash(&(1, "a")));
        assert_ne!(inputs_hash(&(1, "a")), inputs_hash(&(2, "a")));
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&sample(), &["json".into(), "csv".into()], dir.path()).unwrap();
        let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["brjuno.json", "brjuno_partials.csv", "brjuno_checks.csv"]);
        let csv = std::fs::read_to_string(dir.path().join("brjuno_partials.csv")).unwrap();
        assert!(csv.lines().nth(3).unwrap().ends_with(",boom"));
    }
}
