use std::fmt::Write as _;

use locality_lab::report::{Report, Verdict};

use crate::Emit;

pub const SCHEMA: &str = "locality-lab-report v1";

/// Everything a command prints.
#[derive(Debug, Default)]
pub struct Outcome {
    pub command: String,
    /// Instance echo, in print order.
    pub instance: Vec<(String, String)>,
    /// Listed items (enumerations), each a titled block of fields.
    pub items: Vec<(String, Vec<(String, String)>)>,
    pub report: Report,
}

fn one_line(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n")
}

impl Outcome {
    pub fn new(command: &str) -> Self {
        Outcome {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn echo(&mut self, key: &str, value: impl ToString) {
        self.instance.push((key.into(), value.to_string()));
    }

    pub fn render(&self, emit: Emit) -> String {
        let mut report = self.report.clone();
        report.sort();
        match emit {
            Emit::Text => self.text(&report),
            Emit::Structured => self.structured(&report),
        }
    }

    fn text(&self, report: &Report) -> String {
        let mut out = String::new();
        for (k, v) in &self.instance {
            let _ = writeln!(out, "{k:<14} {v}");
        }
        for (title, fields) in &self.items {
            let _ = writeln!(out, "\n{title}");
            for (k, v) in fields {
                let _ = writeln!(out, "  {k:<12} {v}");
            }
        }
        if !report.checks.is_empty() {
            let _ = writeln!(out);
            out.push_str(&report.to_string());
            let fails = report.failures().count();
            let _ = writeln!(out, "\n{} checks, {} failed", report.checks.len(), fails);
        }
        out
    }

    fn structured(&self, report: &Report) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCHEMA}");
        let _ = writeln!(out, "command: {}", self.command);
        let _ = writeln!(out, "\n[instance]");
        for (k, v) in &self.instance {
            let _ = writeln!(out, "{k}: {}", one_line(v));
        }
        for (title, fields) in &self.items {
            let _ = writeln!(out, "\n[item {title}]");
            for (k, v) in fields {
                let _ = writeln!(out, "{k}: {}", one_line(v));
            }
        }
        for c in &report.checks {
            let _ = writeln!(out, "\n[check {}]", c.id);
            let _ = writeln!(out, "verdict: {}", c.verdict.label());
            match &c.verdict {
                Verdict::Pass => {}
                Verdict::Fail(w) => {
                    let _ = writeln!(out, "witness: {}", one_line(w));
                }
                Verdict::Skipped(r) => {
                    let _ = writeln!(out, "reason: {}", one_line(r));
                }
            }
        }
        let _ = writeln!(out, "\n[summary]");
        let _ = writeln!(out, "checks: {}", report.checks.len());
        let _ = writeln!(out, "failed: {}", report.failures().count());
        out
    }
}
