//! Criterion outcomes and the per-run summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::io::Record;

/// Relative spread `(max − min) / min` of a refinement sequence.
///
/// Identically zero sequences have drift 0; a sequence containing a zero and
/// a nonzero value, or any non-finite value, has infinite drift.
pub fn drift(values: &[f64]) -> f64 {
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi == lo {
        0.0
    } else if lo.abs() <= 0.0 {
        f64::INFINITY
    } else {
        (hi - lo) / lo.abs()
    }
}

/// Pass/fail outcome of one acceptance rule within one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionOutcome {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value <= threshold, value, threshold, detail: detail.into() }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value >= threshold, value, threshold, detail: detail.into() }
    }

    /// Combines sub-checks; the reported value is that of the first failure, if any.
    pub fn all(name: &str, parts: Vec<CriterionOutcome>) -> Self {
        let failed = parts.iter().find(|p| !p.passed);
        let head = failed.or(parts.first());
        let detail = parts
            .iter()
            .map(|p| {
                format!("{} {:.4e} vs {:.4e} {}", p.name, p.value, p.threshold, if p.passed { "ok" } else { "FAIL" })
            })
            .collect::<Vec<_>>()
            .join("; ");
        Self {
            name: name.into(),
            passed: failed.is_none() && !parts.is_empty(),
            value: head.map_or(f64::NAN, |p| p.value),
            threshold: head.map_or(f64::NAN, |p| p.threshold),
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: value {:.4e} threshold {:.4e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold,
            self.detail
        )
    }
}

/// Everything one scenario produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    pub subcommand: String,
    pub alpha0: f64,
    pub seed: u64,
    pub levels: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<Record>,
    pub criteria: Vec<CriterionOutcome>,
    /// Empirical constants, keyed by name.
    pub constants: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub elapsed_s: f64,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Values of one quantity across levels, in level order.
    pub fn series(&self, quantity: &str) -> Vec<f64> {
        self.records.iter().filter(|r| r.quantity == quantity).map(|r| r.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub subcommand: String,
    pub passed: bool,
    pub scenarios: Vec<ScenarioReport>,
}

impl Summary {
    pub fn new(subcommand: &str, scenarios: Vec<ScenarioReport>) -> Self {
        Self { subcommand: subcommand.into(), passed: scenarios.iter().all(ScenarioReport::passed), scenarios }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_cases() {
        assert_eq!(drift(&[0.0, 0.0]), 0.0);
        assert_eq!(drift(&[2.0]), 0.0);
        assert!((drift(&[1.0, 1.1, 1.05]) - 0.1).abs() < 1e-12);
        assert_eq!(drift(&[0.0, 1.0]), f64::INFINITY);
        assert_eq!(drift(&[1.0, f64::NAN]), f64::INFINITY);
    }

    #[test]
    fn all_reports_first_failure() {
        let c = CriterionOutcome::all(
            "x",
            vec![CriterionOutcome::at_most("a", 1.0, 2.0, ""), CriterionOutcome::at_least("b", 1.0, 2.0, "")],
        );
        assert!(!c.passed);
        assert_eq!(c.value, 1.0);
        assert_eq!(c.threshold, 2.0);
        assert!(!CriterionOutcome::all("empty", vec![]).passed);
    }
}
