//! Report envelopes and canonical serialization.
//!
//! Every CLI run emits one envelope: artifact version, the resolved field
//! spec (so a defaulted modulus is always on record), a command echo, a
//! timestamp, and the payload. JSON output is canonical: serde_json's
//! default map keeps keys sorted, exact quantities stay integers or
//! `{"num":…,"den":…}` rationals, and no floating point appears anywhere.
//! Volatile fields (`timestamp`, `wall_time_ms`) are stripped by
//! [`canonical_json`] so repeated runs compare byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::directions::FuncTableFile;
use crate::field::{Elem, FieldSpec};
use crate::linearized::FrobeniusMonomial;
use crate::search::{CensusReport, DirectionsSweep, SearchReport};
use crate::sets::DoublingReport;
use crate::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Result of a `directions` query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionsQuery {
    pub directions: Vec<Elem>,
    pub infinity: bool,
}

/// Result of an `analyze` query on a function table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub directions: Vec<Elem>,
    pub direction_count: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearized_coeffs: Option<Vec<Elem>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frobenius_monomial: Option<FrobeniusMonomial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Search(SearchReport),
    SampleDoubling { reports: Vec<SearchReport> },
    DirectionsSweep(DirectionsSweep),
    Census(CensusReport),
    Directions(DirectionsQuery),
    Analyze(AnalyzeReport),
}

impl Payload {
    /// Any theorem-contradiction flag set anywhere in the payload.
    pub fn has_violation(&self) -> bool {
        match self {
            Payload::Search(r) => r.violation,
            Payload::SampleDoubling { reports } => reports.iter().any(|r| r.violation),
            Payload::DirectionsSweep(s) => s.violations > 0,
            Payload::Census(c) => c.violations > 0,
            Payload::Directions(_) | Payload::Analyze(_) => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub version: String,
    /// Field spec echo with the resolved modulus, for reproducibility.
    pub field: FieldSpec,
    pub command: String,
    pub timestamp: String,
    pub status: String,
    pub payload: Payload,
}

impl ReportEnvelope {
    pub fn new(field: FieldSpec, command: String, payload: Payload) -> Self {
        let status = if payload.has_violation() { "violation" } else { "ok" };
        ReportEnvelope {
            version: ARTIFACT_VERSION.to_string(),
            field,
            command,
            timestamp: chrono::Utc::now().to_rfc3339(),
            status: status.to_string(),
            payload,
        }
    }
}

/// Serialize with sorted keys, volatile fields included.
pub fn emit(envelope: &ReportEnvelope, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let value = serde_json::to_value(envelope)?;
            Ok(serde_json::to_string_pretty(&value)?)
        }
        OutputFormat::Csv => emit_csv(envelope),
        OutputFormat::Text => Ok(emit_text(envelope)),
    }
}

/// Canonical form: sorted keys, compact, `timestamp` and `wall_time_ms`
/// removed recursively. Byte-identical across runs and worker counts.
pub fn canonical_json(envelope: &ReportEnvelope) -> Result<String> {
    let mut value = serde_json::to_value(envelope)?;
    strip_volatile(&mut value);
    Ok(serde_json::to_string(&value)?)
}

fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timestamp");
            map.remove("wall_time_ms");
            for (_, child) in map.iter_mut() {
                strip_volatile(child);
            }
        }
        Value::Array(items) => {
            for item in items {
                strip_volatile(item);
            }
        }
        _ => {}
    }
}

fn emit_csv(envelope: &ReportEnvelope) -> Result<String> {
    match &envelope.payload {
        Payload::Census(census) => {
            let mut out = String::from("size,count\n");
            for (size, count) in &census.entries {
                out.push_str(&format!("{size},{count}\n"));
            }
            Ok(out)
        }
        Payload::DirectionsSweep(sweep) => {
            Ok(format!("q,checked,violations\n{},{},{}\n", sweep.q, sweep.checked, sweep.violations))
        }
        _ => Err(Error::UnrepresentableInFormat(
            "only census and directions-sweep payloads flatten to CSV; use --format json".into(),
        )),
    }
}

fn emit_text(envelope: &ReportEnvelope) -> String {
    let mut out = String::new();
    let spec = &envelope.field;
    out.push_str(&format!(
        "field: GF({}^{}) = GF({}), modulus {:?}\n",
        spec.p,
        spec.n,
        (spec.p as u64).pow(spec.n),
        spec.modulus.as_deref().unwrap_or(&[])
    ));
    out.push_str(&format!("command: {}\nstatus: {}\n", envelope.command, envelope.status));
    match &envelope.payload {
        Payload::Search(r) => out.push_str(&search_text(r)),
        Payload::SampleDoubling { reports } => {
            out.push_str(&format!("{} surviving candidate set(s)\n", reports.len()));
            for r in reports {
                out.push_str(&search_text(r));
            }
        }
        Payload::DirectionsSweep(s) => {
            out.push_str(&format!(
                "checked {} tables over GF({}), violations: {}\n",
                s.checked, s.q, s.violations
            ));
        }
        Payload::Census(c) => {
            out.push_str(&format!("checked {} linearized polynomials\n", c.checked));
            for (size, count) in &c.entries {
                out.push_str(&format!("  |D_f| = {size}: {count}\n"));
            }
            out.push_str(&format!(
                "{} distinct direction sets classified, violations: {}\n",
                c.coset_classified.len(),
                c.violations
            ));
        }
        Payload::Directions(d) => {
            out.push_str(&format!(
                "directions: {:?}, infinity: {}\n",
                d.directions, d.infinity
            ));
        }
        Payload::Analyze(a) => {
            out.push_str(&format!(
                "directions ({}): {:?}\n",
                a.direction_count, a.directions
            ));
            match &a.linearized_coeffs {
                Some(c) => out.push_str(&format!("linearized: yes, coeffs {c:?}\n")),
                None => out.push_str("linearized: no\n"),
            }
            match &a.frobenius_monomial {
                Some(m) => out.push_str(&format!(
                    "frobenius monomial: {}·x^(p^{}) + {}\n",
                    m.a, m.j, m.b
                )),
                None => out.push_str("frobenius monomial: no\n"),
            }
        }
    }
    out
}

fn search_text(r: &SearchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "D = {:?} (|D| = {}, |DD| = {}, |DD⁻¹D⁻¹| = {}, c = {}/{})\n",
        r.set, r.hypothesis.size_d, r.hypothesis.size_dd, r.hypothesis.size_triple,
        r.hypothesis.c.num, r.hypothesis.c.den
    ));
    out.push_str(&format!(
        "hypothesis: {}, solutions: {}, all monomial: {}, nodes: {}\n",
        r.hypothesis.hypothesis_holds, r.solution_count, r.all_monomial, r.node_count
    ));
    for m in &r.monomial_forms {
        out.push_str(&format!("  f(x) = {}·x^(p^{})\n", m.a, m.j));
    }
    if r.violation {
        out.push_str("VIOLATION: hypothesis holds but a non-monomial solution exists\n");
    }
    out
}

/// Parse a function-table JSON file and check it against a field spec.
pub fn parse_func_file(text: &str) -> Result<FuncTableFile> {
    Ok(serde_json::from_str(text)?)
}
