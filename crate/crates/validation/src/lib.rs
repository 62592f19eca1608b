// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bookkeeping for the acceptance run: one verdict line per criterion and
//! an exit status that reflects them.

use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Wall-clock budget, if the criterion has one.
    pub budget: Option<Duration>,
}

impl Verdict {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed <= b)
    }

    pub fn passed(&self) -> bool {
        self.pass && self.within_budget()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {status}: {} | {} | {:.1}s", self.id, self.title, self.detail, self.elapsed.as_secs_f64())?;
        if let Some(b) = self.budget {
            write!(f, " (budget {}s)", b.as_secs())?;
            if !self.within_budget() {
                write!(f, " over budget")?;
            }
        }
        Ok(())
    }
}

/// Outcome of a check body: pass flag and a one-line summary of the
/// measured values.
pub type Outcome = Result<(bool, String), String>;

#[derive(Debug, Default)]
pub struct Checklist {
    pub verdicts: Vec<Verdict>,
}

impl Checklist {
    /// Runs `body`, times it and prints the verdict line. An error counts
    /// as a failure with the message as detail; a panic is caught the same
    /// way so later criteria still run.
    pub fn run(&mut self, id: u32, title: &str, budget: Option<Duration>, body: impl FnOnce() -> Outcome) -> &Verdict {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        self.verdicts.push(Verdict { id, title: title.into(), pass, detail, elapsed: start.elapsed(), budget });
        let v = self.verdicts.last().expect("just pushed");
        println!("{v}");
        v
    }

    pub fn failures(&self) -> Vec<u32> {
        self.verdicts.iter().filter(|v| !v.passed()).map(|v| v.id).collect()
    }

    /// Summary line and process exit status (0 when every criterion passed).
    pub fn finish(&self) -> i32 {
        let failed = self.failures();
        let passed = self.verdicts.len() - failed.len();
        if failed.is_empty() {
            println!("acceptance: {passed}/{} criteria passed", self.verdicts.len());
            0
        } else {
            let ids: Vec<String> = failed.iter().map(u32::to_string).collect();
            println!("acceptance: {passed}/{} criteria passed; failed: {}", self.verdicts.len(), ids.join(", "));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_and_panics_become_failures() {
        let mut c = Checklist::default();
        c.run(1, "ok", None, || Ok((true, "fine".into())));
        c.run(2, "err", None, || Err("boom".into()));
        c.run(3, "panic", None, || panic!("bad {}", 1));
        assert_eq!(c.failures(), vec![2, 3]);
        assert!(c.verdicts[2].detail.contains("bad 1"));
        assert_eq!(c.finish(), 1);
    }

    #[test]
    fn budget_overrun_fails() {
        let v = Verdict { id: 1, title: "t".into(), pass: true, detail: String::new(), elapsed: Duration::from_secs(5), budget: Some(Duration::from_secs(1)) };
        assert!(!v.passed());
        assert!(v.to_string().contains("FAIL") && v.to_string().contains("over budget"));
    }
}
