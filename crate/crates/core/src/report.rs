//! The common result type of every inequality functional.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sampling::SamplePlan;

/// Terms below this are treated as zero when deciding degeneracy.
pub const DEGENERATE_TOL: f64 = 1e-14;

/// How the right-hand terms combine into the denominator of the implied constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    Sum,
    Max,
}

/// One evaluated inequality: left side, named right-side terms and the implied constant
/// lhs / combine(rhs_terms). Reports whose sides are split into named left terms (the
/// reverse inequalities) also fill `lhs_terms`, with `lhs` their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub functional: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lhs_terms: BTreeMap<String, f64>,
    pub rhs_terms: BTreeMap<String, f64>,
    pub combine: Combine,
    pub rhs: f64,
    /// `None` when the right side vanishes and the left does not.
    pub implied_constant: Option<f64>,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplePlan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(functional: &str) -> Self {
        Self {
            functional: functional.to_string(),
            params: BTreeMap::new(),
            lhs: 0.0,
            lhs_terms: BTreeMap::new(),
            rhs_terms: BTreeMap::new(),
            combine: Combine::Sum,
            rhs: 0.0,
            implied_constant: None,
            degenerate: true,
            details: BTreeMap::new(),
            checks: BTreeMap::new(),
            plan: None,
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_plan(mut self, plan: SamplePlan) -> Self {
        self.plan = Some(plan);
        self
    }

    pub fn lhs_term(mut self, name: &str, value: f64) -> Self {
        self.lhs_terms.insert(name.to_string(), value);
        self
    }

    pub fn rhs_term(mut self, name: &str, value: f64) -> Self {
        self.rhs_terms.insert(name.to_string(), value);
        self
    }

    pub fn detail(&mut self, name: &str, value: f64) {
        self.details.insert(name.to_string(), value);
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Fixes the left side and computes rhs, the implied constant and degeneracy.
    pub fn finish(mut self, lhs: f64, combine: Combine) -> Self {
        self.lhs = lhs;
        self.combine = combine;
        self.rhs = match combine {
            Combine::Sum => self.rhs_terms.values().sum(),
            Combine::Max => self.rhs_terms.values().copied().fold(0.0, f64::max),
        };
        let all_small = lhs.abs() < DEGENERATE_TOL
            && self.rhs_terms.values().all(|v| v.abs() < DEGENERATE_TOL)
            && self.lhs_terms.values().all(|v| v.abs() < DEGENERATE_TOL);
        self.degenerate = all_small;
        self.implied_constant = if all_small || self.rhs.abs() < DEGENERATE_TOL { None } else { Some(lhs / self.rhs) };
        self
    }

    /// Like [`finish`](Self::finish) with lhs set to the sum of the named left terms.
    pub fn finish_terms(self, combine: Combine) -> Self {
        let lhs = self.lhs_terms.values().sum();
        self.finish(lhs, combine)
    }

    /// Whether lhs ≤ rhs up to a relative slack.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs + rel_tol * self.rhs.abs().max(self.lhs.abs()) + DEGENERATE_TOL
    }

    /// Every numeric field, flattened to `section.name` keys in a stable order.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = vec![("lhs".to_string(), self.lhs), ("rhs".to_string(), self.rhs)];
        out.push(("implied_constant".to_string(), self.implied_constant.unwrap_or(f64::NAN)));
        out.push(("degenerate".to_string(), f64::from(u8::from(self.degenerate))));
        for (section, map) in [("param", &self.params), ("lhs", &self.lhs_terms), ("rhs", &self.rhs_terms), ("detail", &self.details)] {
            out.extend(map.iter().map(|(k, v)| (format!("{section}.{k}"), *v)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_is_never_nan() {
        let r = InequalityReport::new("t").rhs_term("a", 0.0).finish(0.0, Combine::Sum);
        assert!(r.degenerate);
        assert_eq!(r.implied_constant, None);
        let r = InequalityReport::new("t").rhs_term("a", 0.0).finish(1.0, Combine::Sum);
        assert!(!r.degenerate);
        assert_eq!(r.implied_constant, None);
    }

    #[test]
    fn combine_modes() {
        let r = InequalityReport::new("t").rhs_term("a", 1.0).rhs_term("b", 3.0).finish(2.0, Combine::Sum);
        assert_eq!(r.rhs, 4.0);
        assert_eq!(r.implied_constant, Some(0.5));
        let r = InequalityReport::new("t").rhs_term("a", 1.0).rhs_term("b", 3.0).finish(2.0, Combine::Max);
        assert_eq!(r.rhs, 3.0);
    }
}
