//! Structured verification reports: a flat list of named checks, each with a
//! pass/fail verdict and a human-readable detail line. Reports serialize to
//! JSON with a stable field order and print one line per check.

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    /// What kind of identity or property was checked (e.g. "associativity").
    pub name: String,
    /// Which object the check ran against (a chart pair, a sample id, ...).
    pub subject: String,
    pub passed: bool,
    /// Free-form explanation; on failure this should say what differed.
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Report {
        Report { checks: Vec::new() }
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        subject: impl Into<String>,
        passed: bool,
        detail: impl Into<String>,
    ) {
        self.checks.push(CheckRecord {
            name: name.into(),
            subject: subject.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// True when every recorded check passed (an empty report passes).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "ok  " } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{verdict} {} [{}]", c.name, c.subject)?;
            } else {
                writeln!(f, "{verdict} {} [{}]: {}", c.name, c.subject, c.detail)?;
            }
        }
        Ok(())
    }
}
