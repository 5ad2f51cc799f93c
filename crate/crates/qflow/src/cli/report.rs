use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) => format!("{f:.16e}"),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Str(s) => Json::from(s.as_str()),
            Value::Int(i) => Json::from(*i),
            Value::Float(f) => serde_json::Number::from_f64(*f).map_or(Json::Null, Json::Number),
            Value::Bool(b) => Json::from(*b),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// Ordered `(column, value)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Record(pub Vec<(&'static str, Value)>);

impl Record {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn passed(&self) -> bool {
        !matches!(self.get("pass"), Some(Value::Bool(false)))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub records: Vec<Record>,
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.passed()).count()
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.failures() == 0
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: Vec<(String, String)>,
    pub suites: Vec<SuiteReport>,
    pub wall_time: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed())
    }

    pub fn to_json(&self) -> Json {
        let records: Vec<Json> = self
            .suites
            .iter()
            .flat_map(|s| {
                s.records.iter().map(move |r| {
                    let mut m = Map::new();
                    m.insert("suite".into(), Json::from(s.name));
                    for (k, v) in &r.0 {
                        m.insert((*k).into(), v.json());
                    }
                    Json::Object(m)
                })
            })
            .collect();
        let config: Map<String, Json> = self.config.iter().map(|(k, v)| (k.clone(), Json::from(v.as_str()))).collect();
        let errors: Map<String, Json> = self
            .suites
            .iter()
            .filter_map(|s| s.error.as_ref().map(|e| (s.name.to_string(), Json::from(e.as_str()))))
            .collect();
        json!({
            "records": records,
            "metadata": { "config": config, "errors": errors, "wall_time_s": self.wall_time },
        })
    }
}

fn write_csv(suite: &SuiteReport, sink: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&suite.columns).map_err(io)?;
    for r in &suite.records {
        w.write_record(r.0.iter().map(|(_, v)| v.csv())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// `out` for a single suite, otherwise `<stem>.<suite>.<ext>` next to it.
fn suite_path(out: &Path, suite: &str, many: bool) -> PathBuf {
    if !many {
        return out.to_path_buf();
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}.{suite}.{ext}"))
}

/// Writes the report to `out`, or to stdout when `out` is `None`.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.to_json()).map_err(|e| Error::Io(e.to_string()))? + "\n";
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Format::Csv => {
            let many = report.suites.len() > 1;
            for s in &report.suites {
                match out {
                    Some(p) => write_csv(s, std::fs::File::create(suite_path(p, s.name, many))?)?,
                    None => {
                        let mut stdout = std::io::stdout().lock();
                        if many {
                            writeln!(stdout, "# {}", s.name)?;
                        }
                        write_csv(s, &mut stdout)?;
                    }
                }
            }
        }
    }
    Ok(())
}
