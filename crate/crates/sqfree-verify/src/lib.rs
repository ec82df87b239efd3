//! Bookkeeping for the acceptance run: each criterion collects named
//! checks and prints a single verdict line followed by its details.

use std::fmt::Display;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Check {
    pub ok: bool,
    pub text: String,
}

#[derive(Debug)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub budget: Option<Duration>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    started: Instant,
}

/// Half a unit in the last printed decimal of `printed`.
pub fn half_ulp(printed: &str) -> f64 {
    let decimals = printed.split_once('.').map_or(0, |(_, d)| d.len());
    0.5 * 10f64.powi(-(decimals as i32))
}

impl Criterion {
    pub fn new(id: u32, title: &'static str, budget: Option<Duration>) -> Self {
        Criterion { id, title, budget, checks: Vec::new(), notes: Vec::new(), started: Instant::now() }
    }

    pub fn check(&mut self, ok: bool, text: impl Into<String>) -> bool {
        self.checks.push(Check { ok, text: text.into() });
        ok
    }

    /// `|got − want| ≤ tol`.
    pub fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) -> bool {
        let ok = (got - want).abs() <= tol;
        self.check(ok, format!("{label}: got {got:.10}, want {want} ± {tol:e}"))
    }

    /// Agreement with a printed value to its last shown decimal.
    pub fn printed(&mut self, label: &str, got: f64, printed: &str) -> bool {
        let want: f64 = printed.parse().expect("printed value parses");
        self.close(label, got, want, half_ulp(printed))
    }

    pub fn equal<T: PartialEq + Display>(&mut self, label: &str, got: T, want: T) -> bool {
        let ok = got == want;
        self.check(ok, format!("{label}: got {got}, want {want}"))
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn error(&mut self, e: impl Display) {
        self.check(false, format!("error: {e}"));
    }

    /// Prints the verdict and returns whether every check held within budget.
    pub fn finish(mut self) -> bool {
        let elapsed = self.started.elapsed();
        if let Some(b) = self.budget {
            self.check(elapsed <= b, format!("runtime {:.1} s within {} s", elapsed.as_secs_f64(), b.as_secs()));
        }
        let pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.ok);
        println!("C{} {} {} ({:.1} s)", self.id, if pass { "PASS" } else { "FAIL" }, self.title, elapsed.as_secs_f64());
        for c in &self.checks {
            println!("    {} {}", if c.ok { "ok  " } else { "FAIL" }, c.text);
        }
        for n in &self.notes {
            println!("    info {n}");
        }
        pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_units() {
        assert_eq!(half_ulp("0.333331"), 5e-7);
        assert_eq!(half_ulp("2.789"), 5e-4);
        assert_eq!(half_ulp("124281"), 0.5);
    }

    #[test]
    fn verdicts() {
        let mut c = Criterion::new(0, "demo", None);
        assert!(c.printed("x", 0.12500014, "0.1250001"));
        assert!(!c.printed("y", 0.1250002, "0.1250001"));
        assert!(!c.finish());
        assert!(!Criterion::new(0, "empty", None).finish());
    }
}
