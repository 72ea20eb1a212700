//! Audit records comparing two independently computed sides of an identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::padic::PadicNumber;

const NOT_STABILIZED: &str = "not_stabilized";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// `diff_valuation` is `order(lhs - rhs)`; for power-series identities it is
/// the x-adic order of the difference. `verdict` is absent on report-only
/// records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub identity: String,
    pub params: BTreeMap<String, String>,
    pub lhs: String,
    pub rhs: String,
    pub diff_valuation: Option<i64>,
    pub target: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl AuditReport {
    pub fn new(identity: &str) -> Self {
        Self {
            identity: identity.to_string(),
            params: BTreeMap::new(),
            lhs: String::new(),
            rhs: String::new(),
            diff_valuation: None,
            target: 0,
            verdict: None,
            details: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    /// Fills both sides and the difference valuation, and a verdict unless
    /// `report_only`.
    pub fn compare(
        mut self,
        lhs: &PadicNumber,
        rhs: &PadicNumber,
        target: i64,
        report_only: bool,
    ) -> Self {
        self.lhs = lhs.to_string();
        self.rhs = rhs.to_string();
        self.target = target;
        self.diff_valuation = lhs.diff_valuation(rhs).ok();
        if !report_only {
            self.verdict = Some(match self.diff_valuation {
                Some(d) if d >= target => Verdict::Pass,
                _ => Verdict::Fail,
            });
        }
        self
    }

    /// A FAIL record for an evaluation that could not be carried out.
    pub fn failed(mut self, target: i64, err: &Error) -> Self {
        self.target = target;
        self.verdict = Some(Verdict::Fail);
        self.details
            .insert("error".into(), serde_json::Value::String(err.to_string()));
        if matches!(err, Error::NotStabilized { .. }) {
            self.details.insert(NOT_STABILIZED.into(), true.into());
        }
        self
    }

    /// Marks a record whose Riemann sums missed their target.
    pub fn mark_not_stabilized(mut self) -> Self {
        self.details.insert(NOT_STABILIZED.into(), true.into());
        self
    }

    pub fn not_stabilized(&self) -> bool {
        self.details.get(NOT_STABILIZED) == Some(&serde_json::Value::Bool(true))
    }

    pub fn passed(&self) -> bool {
        self.verdict != Some(Verdict::Fail)
    }
}
