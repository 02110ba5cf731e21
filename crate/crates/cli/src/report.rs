//! Report model and its three renderings.
//!
//! The json rendering is canonical: keys sorted, two-space indent, trailing
//! newline. The `sha256` field digests that rendering with the timestamp
//! and the digest itself left out.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Format;

pub const TOOL: &str = "subadd-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a section bears on the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    Inconclusive,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violation => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

/// A table for external plotting; cells are `p/q` strings or labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub kind: String,
    pub outcome: Outcome,
    pub summary: Vec<String>,
    pub body: Value,
    #[serde(default)]
    pub traces: Vec<Trace>,
}

impl Section {
    pub fn new(name: &str, kind: &str, outcome: Outcome, summary: Vec<String>, body: impl Serialize) -> Section {
        Section {
            name: name.to_string(),
            kind: kind.to_string(),
            outcome,
            summary,
            body: serde_json::to_value(body).expect("report bodies serialize"),
            traces: Vec::new(),
        }
    }

    pub fn with_trace(mut self, t: Trace) -> Section {
        self.traces.push(t);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: Value,
    pub sections: Vec<Section>,
    /// Seconds since the Unix epoch; never part of the digest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error("digest mismatch: document says {stated}, content hashes to {actual}")]
    Digest { stated: String, actual: String },
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("json values serialize");
    out.push(b'\n');
    out
}

impl Report {
    pub fn new(config: Value) -> Report {
        Report {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            config,
            sections: Vec::new(),
            timestamp: None,
        }
    }

    pub fn outcome(&self) -> Outcome {
        self.sections.iter().map(|s| s.outcome).max().unwrap_or(Outcome::Ok)
    }

    /// The document with neither timestamp nor digest; `serde_json::Value`
    /// keeps object keys sorted.
    fn canonical_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("timestamp");
        }
        v
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        pretty(&self.canonical_value())
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = self.canonical_value();
        if let Value::Object(m) = &mut v {
            m.insert("sha256".into(), Value::String(self.digest()));
            if let Some(t) = self.timestamp {
                m.insert("timestamp".into(), Value::from(t));
            }
        }
        pretty(&v)
    }

    /// Parses a json rendering and checks its digest.
    pub fn from_json(bytes: &[u8]) -> Result<Report, ReportError> {
        let mut v: Value = serde_json::from_slice(bytes).map_err(|e| ReportError::Malformed(e.to_string()))?;
        let stated = match &mut v {
            Value::Object(m) => m.remove("sha256"),
            _ => None,
        };
        let report: Report = serde_json::from_value(v).map_err(|e| ReportError::Malformed(e.to_string()))?;
        if let Some(Value::String(stated)) = stated {
            let actual = report.digest();
            if stated != actual {
                return Err(ReportError::Digest { stated, actual });
            }
        }
        Ok(report)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.tool, self.version);
        for s in &self.sections {
            out.push_str(&format!("\n== {} [{}] ==\n", s.name, outcome_word(s.outcome)));
            for line in &s.summary {
                out.push_str(line);
                out.push('\n');
            }
            for t in &s.traces {
                out.push_str(&format!("trace {}: {} rows\n", t.name, t.rows.len()));
            }
        }
        out.push_str(&format!("\nsha256 {}\n", self.digest()));
        out
    }

    /// One `(file name, csv)` per trace, in section order.
    pub fn to_csv_bundle(&self) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        for s in &self.sections {
            for t in &s.traces {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.columns).expect("in-memory write");
                for r in &t.rows {
                    w.write_record(r).expect("in-memory write");
                }
                let bytes = w.into_inner().expect("in-memory flush");
                out.push((format!("{}__{}.csv", slug(&s.name), slug(&t.name)), bytes));
            }
        }
        out
    }
}

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Ok => "ok",
        Outcome::Inconclusive => "inconclusive",
        Outcome::Violation => "VIOLATION",
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

pub enum Rendered {
    Single(Vec<u8>),
    Bundle(Vec<(String, Vec<u8>)>),
}

impl Rendered {
    /// A bundle is concatenated with a `# name` line before each file.
    pub fn into_bytes(self) -> Vec<u8> {
        match self {
            Rendered::Single(b) => b,
            Rendered::Bundle(files) => {
                let mut out = Vec::new();
                for (name, bytes) in files {
                    out.extend_from_slice(format!("# {}\n", name).as_bytes());
                    out.extend_from_slice(&bytes);
                }
                out
            }
        }
    }
}

pub fn render(report: &Report, format: Format) -> Rendered {
    match format {
        Format::Json => Rendered::Single(report.to_json()),
        Format::Text => Rendered::Single(report.to_text().into_bytes()),
        Format::CsvBundle => Rendered::Bundle(report.to_csv_bundle()),
    }
}

/// `render` for a format given by name.
pub fn render_named(report: &Report, format: &str) -> Result<Rendered, ReportError> {
    let f: Format = format
        .parse()
        .map_err(|_| ReportError::UnsupportedFormat(format.to_string()))?;
    Ok(render(report, f))
}
