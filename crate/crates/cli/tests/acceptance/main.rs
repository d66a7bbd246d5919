//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! that survives output capture, plus the binary's exit-code contract.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

mod contract;
mod criteria;

pub fn tcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcert"))
        .args(args)
        .env_remove("TEMPORAL_CERT_TOL")
        .output()
        .expect("tcert runs")
}

pub fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Collects sub-checks for one criterion and reports them in one block.
pub struct Criterion {
    id: u32,
    title: &'static str,
    lines: Vec<(bool, String)>,
}

impl Criterion {
    pub fn new(id: u32, title: &'static str) -> Self {
        Criterion { id, title, lines: Vec::new() }
    }

    pub fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.lines.push((ok, detail.into()));
    }

    /// Exit status of `tcert args` must be zero.
    pub fn cli(&mut self, args: &[&str]) {
        let o = tcert(args);
        let c = code(&o);
        self.check(c == 0, format!("tcert {} exits {c}", args.join(" ")));
    }

    pub fn finish(self) {
        let passed = self.lines.iter().all(|(ok, _)| *ok);
        let verdict = if passed { "PASS" } else { "FAIL" };
        let mut block = format!("acceptance {:>2} {verdict} {}\n", self.id, self.title);
        for (ok, detail) in &self.lines {
            block.push_str(&format!("    [{}] {detail}\n", if *ok { "ok" } else { "FAIL" }));
        }
        // Direct handle writes are not captured by the test harness.
        let _ = std::io::stderr().lock().write_all(block.as_bytes());
        assert!(passed, "criterion {} failed", self.id);
    }
}
