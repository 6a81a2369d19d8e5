//! Per-iteration solver trace and its CSV rendering.
//!
//! The CSV schema is a repo contract:
//! `iter,queries,f,gap_obj,gap_fw,branch,elapsed_ms`, with `gap_obj`
//! filled in at render time from a reference value and empty columns for
//! metrics that were not recorded. Everything except `elapsed_ms` is
//! deterministic for a fixed seed and config.

use crate::estimators::UpdateBranch;
use std::io::{self, Write};

#[derive(Clone, Debug)]
pub struct TraceRecord {
    /// Iteration index; 0 is the state after initialization.
    pub t: usize,
    /// Cumulative metered component evaluations.
    pub queries: u64,
    /// Unmetered full objective value at the current iterate.
    pub f_value: f64,
    /// Frank-Wolfe gap from the white-box diagnostic, when enabled.
    pub fw_gap: Option<f64>,
    /// Tracker branch taken by the iteration that produced this row
    /// (absent for row 0 and for solvers without branches).
    pub branch: Option<UpdateBranch>,
    /// Wall-clock milliseconds since the run started.
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: &str = "iter,queries,f,gap_obj,gap_fw,branch,elapsed_ms";

impl Trace {
    pub fn push(&mut self, rec: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(rec.queries >= last.queries, "query counter went backwards");
        }
        self.records.push(rec);
    }

    pub fn warn(&mut self, msg: String) {
        // One warning per distinct message keeps long runs readable.
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace has at least the init row")
    }

    pub fn best_f(&self) -> f64 {
        self.records.iter().map(|r| r.f_value).fold(f64::INFINITY, f64::min)
    }

    pub fn total_queries(&self) -> u64 {
        self.last().queries
    }

    pub fn write_csv<W: Write>(&self, f_star: Option<f64>, out: &mut W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let gap_obj = match f_star {
                Some(fs) => format!("{}", r.f_value - fs),
                None => String::new(),
            };
            let gap_fw = match r.fw_gap {
                Some(g) => format!("{g}"),
                None => String::new(),
            };
            let branch = match r.branch {
                Some(UpdateBranch::Full) => "FULL",
                Some(UpdateBranch::Minibatch) => "MINIBATCH",
                None => "NA",
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                r.t, r.queries, r.f_value, gap_obj, gap_fw, branch, r.elapsed_ms
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, f_star: Option<f64>) -> String {
        let mut buf = Vec::new();
        self.write_csv(f_star, &mut buf).expect("string write cannot fail");
        String::from_utf8(buf).expect("csv is utf8")
    }
}

/// Drops the trailing `elapsed_ms` column from every line, for
/// byte-level determinism comparisons.
pub fn csv_without_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rfind(',') {
            Some(pos) => &line[..pos],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}
