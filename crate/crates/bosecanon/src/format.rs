//! CSV and JSON encodings of scalars, tables and verification reports.
//!
//! Exact values are written as `"p/q"` strings. Log-domain values go to JSON
//! as `{"log": true, "value": ln x}` (`null` for zero) and to CSV as `ln x`.

use std::io::Write;

use bosecanon_core::compositions::CapVector;
use bosecanon_core::numerics::{Backend, Scalar};
use bosecanon_core::verify::{
    SystemDescriptor, Verdict, VerdictCounts, VerificationReport, Witness,
};
use serde_json::{json, Value};

pub fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(q) => Value::String(q.to_string()),
        Scalar::Log(lf) => json!({ "log": true, "value": lf.ln_value() }),
    }
}

pub fn value_json<S: Backend>(x: &S) -> Value {
    scalar_json(&x.to_scalar())
}

pub fn real_json<S: Backend>(r: &S::Real) -> Value {
    match S::real_to_rational(r) {
        Some(q) => Value::String(q.to_string()),
        None => float_json(S::real_to_f64(r)),
    }
}

fn float_json(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// CSV cell for a value; log-domain values are written as their logarithm.
pub fn value_csv<S: Backend>(x: &S) -> String {
    match x.to_scalar() {
        Scalar::Exact(q) => q.to_string(),
        Scalar::Log(lf) => match lf.ln_value() {
            Some(v) => v.to_string(),
            None => "-inf".to_string(),
        },
    }
}

/// CSV cell for a value written on the linear scale.
pub fn linear_csv<S: Backend>(x: &S) -> String {
    match x.to_scalar() {
        Scalar::Exact(q) => q.to_string(),
        Scalar::Log(lf) => lf.to_linear().to_string(),
    }
}

pub fn real_csv<S: Backend>(r: &S::Real) -> String {
    match S::real_to_rational(r) {
        Some(q) => q.to_string(),
        None => S::real_to_f64(r).to_string(),
    }
}

pub fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Rational(q) => Value::String(q.to_string()),
        Witness::Float(x) => float_json(*x),
        Witness::Integer(n) => Value::String(n.to_string()),
        Witness::None => Value::Null,
    }
}

pub fn witness_csv(w: &Witness) -> String {
    match w {
        Witness::Float(x) => x.to_string(),
        other => other.to_string(),
    }
}

fn caps_json(p: &CapVector) -> Value {
    Value::String(p.to_string())
}

pub fn report_json(r: &VerificationReport) -> Value {
    let inst = &r.instance;
    let mut instance = serde_json::Map::new();
    instance.insert("id".into(), json!(inst.id));
    instance.insert("seed".into(), json!(inst.seed));
    match &inst.system {
        SystemDescriptor::Weights(ws) => {
            instance.insert(
                "weights".into(),
                Value::Array(ws.iter().map(scalar_json).collect()),
            );
        }
        SystemDescriptor::Levels(levels) => {
            let items: Vec<Value> = levels
                .energies()
                .iter()
                .zip(levels.degeneracies())
                .map(|(e, d)| json!({ "energy": e.to_string(), "degeneracy": d }))
                .collect();
            instance.insert("levels".into(), Value::Array(items));
            instance.insert("beta".into(), inverse_temperature_json(levels.beta()));
        }
        SystemDescriptor::Caps(p) => {
            instance.insert("caps".into(), caps_json(p));
        }
    }
    if !inst.extra_weights.is_empty() {
        instance.insert(
            "extra_weights".into(),
            Value::Array(inst.extra_weights.iter().map(scalar_json).collect()),
        );
    }
    if let Some(sup) = &inst.superset {
        instance.insert(
            "superset".into(),
            Value::Array(sup.iter().map(scalar_json).collect()),
        );
    }
    instance.insert("N".into(), json!(r.location.n));
    instance.insert("indices".into(), json!(r.location.indices));
    if !r.location.note.is_empty() {
        instance.insert("note".into(), json!(r.location.note));
    }
    json!({
        "claim": r.claim.id(),
        "instance": Value::Object(instance),
        "verdict": r.verdict.id(),
        "lhs": witness_json(&r.lhs),
        "rhs": witness_json(&r.rhs),
    })
}

pub fn inverse_temperature_json(beta: &bosecanon_core::spectrum::InverseTemperature) -> Value {
    use bosecanon_core::spectrum::InverseTemperature;
    match beta {
        InverseTemperature::Float(b) => float_json(*b),
        InverseTemperature::Rational { beta, log_base } => {
            json!({ "beta": beta.to_string(), "log_base": log_base.to_string() })
        }
    }
}

pub fn inverse_temperature_csv(beta: &bosecanon_core::spectrum::InverseTemperature) -> String {
    use bosecanon_core::spectrum::InverseTemperature;
    match beta {
        InverseTemperature::Float(b) => b.to_string(),
        InverseTemperature::Rational { beta, .. } => beta.to_string(),
    }
}

pub fn counts_json(counts: &VerdictCounts) -> Value {
    let mut out = serde_json::Map::new();
    for (claim, per) in counts {
        let row: serde_json::Map<String, Value> = Verdict::ALL
            .iter()
            .map(|v| (v.id().to_string(), json!(per.get(v).copied().unwrap_or(0))))
            .collect();
        out.insert(claim.id().to_string(), Value::Object(row));
    }
    Value::Object(out)
}

pub fn counts_table(counts: &VerdictCounts) -> Table {
    let mut header = vec!["claim".to_string()];
    header.extend(Verdict::ALL.iter().map(|v| v.id().to_string()));
    let rows = counts
        .iter()
        .map(|(claim, per)| {
            let mut row = vec![claim.id().to_string()];
            row.extend(
                Verdict::ALL
                    .iter()
                    .map(|v| per.get(v).copied().unwrap_or(0).to_string()),
            );
            row
        })
        .collect();
    Table {
        comments: Vec::new(),
        header,
        rows,
    }
}

pub fn reports_table(reports: &[VerificationReport]) -> Table {
    let header = [
        "claim", "instance", "N", "indices", "note", "verdict", "lhs", "rhs",
    ];
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.claim.id().to_string(),
                r.instance.id.to_string(),
                r.location.n.map(|n| n.to_string()).unwrap_or_default(),
                r.location
                    .indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
                r.location.note.to_string(),
                r.verdict.id().to_string(),
                witness_csv(&r.lhs),
                witness_csv(&r.rhs),
            ]
        })
        .collect();
    Table {
        comments: Vec::new(),
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

/// A CSV table, optionally preceded by `# key=value` comment lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = &'static str>>(header: I) -> Self {
        Table {
            comments: Vec::new(),
            header: header.into_iter().map(String::from).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = out;
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }
}

/// Data produced by a subcommand, in whichever encoding was requested.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Csv(Table),
    Json(Value),
}

impl Output {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self {
            Output::Csv(t) => t.write(out),
            Output::Json(v) => {
                serde_json::to_writer_pretty(&mut out, v)?;
                writeln!(out)
            }
        }
    }
}
