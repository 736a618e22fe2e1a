//! Pass/fail records produced by every checker.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Carries a witness.
    Fail(String),
    /// Carries the reason the check could not run.
    Skipped(String),
}

impl Verdict {
    pub fn from_witness(witness: Option<String>) -> Self {
        match witness {
            None => Verdict::Pass,
            Some(w) => Verdict::Fail(w),
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Skipped(_) => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: impl Into<String>, verdict: Verdict) {
        self.checks.push(Check {
            id: id.into(),
            verdict,
        });
    }

    pub fn witness(&mut self, id: impl Into<String>, witness: Option<String>) {
        self.push(id, Verdict::from_witness(witness));
    }

    /// Appends `other` with every id prefixed by `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.push(format!("{prefix}.{}", c.id), c.verdict);
        }
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.push(c.id, c.verdict);
        }
    }

    pub fn all_pass(&self) -> bool {
        !self.checks.iter().any(|c| c.verdict.is_fail())
    }

    pub fn get(&self, id: &str) -> Option<&Verdict> {
        self.checks.iter().find(|c| c.id == id).map(|c| &c.verdict)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict.is_fail())
    }

    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.verdict {
                Verdict::Pass => writeln!(f, "{:<8} {}", "pass", c.id)?,
                Verdict::Fail(w) => writeln!(f, "{:<8} {}: {}", "FAIL", c.id, w)?,
                Verdict::Skipped(r) => writeln!(f, "{:<8} {} ({})", "skipped", c.id, r)?,
            }
        }
        Ok(())
    }
}
