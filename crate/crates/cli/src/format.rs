//! Rendering of values and audit records as text, CSV or JSON.

use std::collections::{BTreeMap, BTreeSet};

use padic_qgamma::audit::{AuditReport, Verdict};
use serde_json::{Map, Value};

use crate::config::Format;

/// One evaluated value or one stability-table line.
#[derive(Clone, Debug)]
pub struct Row {
    pub quantity: String,
    pub params: BTreeMap<String, String>,
    /// Text form.
    pub value: String,
    /// JSON form.
    pub json: Value,
    pub fields: BTreeMap<String, Value>,
    pub converged: Option<bool>,
}

impl Row {
    pub fn new(quantity: &str) -> Self {
        Self {
            quantity: quantity.to_string(),
            params: BTreeMap::new(),
            value: String::new(),
            json: Value::Null,
            fields: BTreeMap::new(),
            converged: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn label(&self) -> String {
        let mut parts = vec![self.quantity.clone()];
        parts.extend(self.params.iter().map(|(k, v)| format!("{k}={v}")));
        parts.join(" ")
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_body(header: &[String], records: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn rows_body(rows: &[Row], format: Format) -> String {
    match format {
        Format::Text => {
            if let [row] = rows {
                if row.fields.is_empty() || row.converged.is_some() {
                    return format!("{}\n", row.value);
                }
            }
            rows.iter()
                .map(|r| {
                    let mut line = format!("{}: {}", r.label(), r.value);
                    for (k, v) in &r.fields {
                        line.push_str(&format!(" {k}={}", scalar(v)));
                    }
                    line + "\n"
                })
                .collect()
        }
        Format::Csv => {
            let params: BTreeSet<&String> = rows.iter().flat_map(|r| r.params.keys()).collect();
            let fields: BTreeSet<&String> = rows.iter().flat_map(|r| r.fields.keys()).collect();
            let mut header = vec!["quantity".to_string()];
            header.extend(params.iter().map(|k| k.to_string()));
            header.push("value".into());
            header.extend(fields.iter().map(|k| k.to_string()));
            csv_body(
                &header,
                rows.iter().map(|r| {
                    let mut rec = vec![r.quantity.clone()];
                    rec.extend(params.iter().map(|k| r.params.get(*k).cloned().unwrap_or_default()));
                    rec.push(r.value.clone());
                    rec.extend(fields.iter().map(|k| r.fields.get(*k).map(scalar).unwrap_or_default()));
                    rec
                }),
            )
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    obj.insert("quantity".into(), r.quantity.clone().into());
                    obj.insert(
                        "params".into(),
                        Value::Object(r.params.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect()),
                    );
                    obj.insert("text".into(), r.value.clone().into());
                    obj.insert("value".into(), r.json.clone());
                    for (k, v) in &r.fields {
                        obj.insert(k.clone(), v.clone());
                    }
                    Value::Object(obj)
                })
                .collect();
            serde_json::to_string_pretty(&list).expect("plain data") + "\n"
        }
    }
}

fn verdict_word(r: &AuditReport) -> &'static str {
    match r.verdict {
        Some(Verdict::Pass) => "PASS",
        Some(Verdict::Fail) => "FAIL",
        None => "INFO",
    }
}

fn params_text(r: &AuditReport, sep: &str) -> String {
    r.params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn reports_body(reports: &[AuditReport], format: Format) -> String {
    let diff = |r: &AuditReport| r.diff_valuation.map(|d| d.to_string()).unwrap_or_default();
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("plain data") + "\n",
        Format::Csv => {
            let header: Vec<String> = [
                "identity",
                "params",
                "lhs",
                "rhs",
                "diff_valuation",
                "target",
                "verdict",
                "details",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            csv_body(
                &header,
                reports.iter().map(|r| {
                    let details = if r.details.is_empty() {
                        String::new()
                    } else {
                        serde_json::to_string(&r.details).expect("plain data")
                    };
                    vec![
                        r.identity.clone(),
                        params_text(r, ";"),
                        r.lhs.clone(),
                        r.rhs.clone(),
                        diff(r),
                        r.target.to_string(),
                        r.verdict.map(|_| verdict_word(r)).unwrap_or("").to_string(),
                        details,
                    ]
                }),
            )
        }
        Format::Text => {
            let mut out: String = reports
                .iter()
                .map(|r| {
                    let mut line = format!(
                        "{} {} {} diff={} target={}",
                        verdict_word(r),
                        r.identity,
                        params_text(r, " "),
                        diff(r),
                        r.target
                    );
                    if let Some(Value::String(e)) = r.details.get("error") {
                        line.push_str(&format!(" error=\"{e}\""));
                    }
                    if r.not_stabilized() {
                        line.push_str(" not_stabilized");
                    }
                    line + "\n"
                })
                .collect();
            let asserted = reports.iter().filter(|r| r.verdict.is_some()).count();
            let failed = reports.iter().filter(|r| !r.passed()).count();
            out.push_str(&format!(
                "summary: {} records, {asserted} asserted, {failed} failed\n",
                reports.len()
            ));
            out
        }
    }
}
