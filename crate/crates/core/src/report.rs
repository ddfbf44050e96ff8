//! Plain-data verification reports shared by every check.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Display;

/// At most this many counterexamples are kept verbatim; the rest are counted.
pub const MAX_COUNTEREXAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Report {
    pub check_name: String,
    /// The property the check exercises, in words.
    pub anchor: String,
    pub status: Status,
    pub counterexamples: Vec<String>,
    pub statistics: BTreeMap<String, String>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(check_name: &str, anchor: &str) -> Self {
        Report {
            check_name: check_name.to_string(),
            anchor: anchor.to_string(),
            status: Status::Pass,
            counterexamples: Vec::new(),
            statistics: BTreeMap::new(),
            budget: None,
            seed: None,
        }
    }

    pub fn skipped(check_name: &str, anchor: &str, reason: &str) -> Self {
        let mut r = Report::new(check_name, anchor);
        r.status = Status::Skipped;
        r.statistics.insert("reason".to_string(), reason.to_string());
        r
    }

    pub fn stat(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.statistics.insert(key.to_string(), value.to_string());
        self
    }

    /// Records a counterexample and marks the report failed.
    pub fn fail(&mut self, counterexample: impl Display) {
        self.status = Status::Fail;
        let n = self.failure_count();
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(counterexample.to_string());
        }
        self.statistics
            .insert("violations".to_string(), (n + 1).to_string());
    }

    pub fn failure_count(&self) -> u64 {
        self.statistics
            .get("violations")
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexamples_are_capped_but_counted() {
        let mut r = Report::new("demo", "demo property");
        assert!(r.passed());
        for i in 0..40 {
            r.fail(i);
        }
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.counterexamples.len(), MAX_COUNTEREXAMPLES);
        assert_eq!(r.failure_count(), 40);
    }
}
