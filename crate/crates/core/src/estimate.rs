//! Implied-constant reports for measured inequalities.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    /// `rhs > 0`; the implied constant is `lhs / rhs`.
    Measured,
    /// `lhs = rhs = 0`: the inequality reads `0 <= 0` and carries no constant.
    Vacuous,
    /// `lhs > 0 = rhs`: no finite constant can hold.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// One measured inequality `lhs <= C rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub status: EstimateStatus,
    pub implied_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakdown: Vec<BreakdownRow>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let (status, implied_constant) = if rhs > 0.0 {
            (EstimateStatus::Measured, Some(lhs / rhs))
        } else if lhs == 0.0 {
            (EstimateStatus::Vacuous, None)
        } else {
            (EstimateStatus::Unbounded, None)
        };
        Self { name: name.into(), lhs, rhs, status, implied_constant, breakdown: Vec::new(), metadata: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_breakdown(mut self, rows: Vec<BreakdownRow>) -> Self {
        self.breakdown = rows;
        self
    }

    pub fn is_vacuous(&self) -> bool {
        self.status == EstimateStatus::Vacuous
    }

    /// Finite implied constant, if any.
    pub fn constant(&self) -> Option<f64> {
        self.implied_constant.filter(|c| c.is_finite())
    }

    /// True when `lhs <= c * rhs`; vacuous reports hold for every `c`.
    pub fn holds_with(&self, c: f64) -> bool {
        match self.status {
            EstimateStatus::Vacuous => true,
            EstimateStatus::Unbounded => false,
            EstimateStatus::Measured => self.lhs <= c * self.rhs,
        }
    }
}

/// Flat CSV of reports: `name,lhs,rhs,status,implied_constant,metadata`.
pub fn reports_csv(reports: &[EstimateReport]) -> String {
    let mut out = String::from("name,lhs,rhs,status,implied_constant,metadata\n");
    for r in reports {
        let status = match r.status {
            EstimateStatus::Measured => "measured",
            EstimateStatus::Vacuous => "vacuous",
            EstimateStatus::Unbounded => "unbounded",
        };
        let c = r.implied_constant.map(|c| format!("{c:.17e}")).unwrap_or_default();
        let meta: Vec<String> = r.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            out,
            "{},{:.17e},{:.17e},{},{},\"{}\"",
            r.name,
            r.lhs,
            r.rhs,
            status,
            c,
            meta.join(";").replace('"', "'")
        );
    }
    out
}

/// Largest finite implied constant among the reports.
pub fn max_constant<'a>(reports: impl IntoIterator<Item = &'a EstimateReport>) -> Option<f64> {
    reports.into_iter().filter_map(EstimateReport::constant).fold(None, |m, c| Some(m.map_or(c, |m: f64| m.max(c))))
}
