//! Frank-Wolfe solvers over the query-only objective view: the double
//! variance reduction method, three zeroth-order baselines, and the
//! projected-gradient reference used to pin optimal values.

mod baselines;
mod pgd;
mod schedules;
mod zsfw;

pub use baselines::{acc_szofw, zofwgd, zofwsgd};
pub use pgd::{pgd_reference, PgdResult};
pub use schedules::{GammaSchedule, MuSchedule};
pub use zsfw::zsfw_dvr;

use crate::constraints::ConstraintSet;
use crate::estimators::BranchLog;
use crate::numerics::DenseVector;
use crate::trace::{Trace, TraceRecord};

/// Shared knobs for a solver run. Baselines ignore the branch
/// probability and sample size; the harness passes their batch and epoch
/// parameters explicitly.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Full-refresh probability, in `(0, 1]`.
    pub p: f64,
    /// Gaussian directions per estimate.
    pub b: usize,
    /// Minibatch size `|S|` for difference updates.
    pub sample_size: usize,
    /// Iteration horizon `T`.
    pub t_iters: usize,
    pub seed: u64,
    pub gamma: GammaSchedule,
    pub mu: MuSchedule,
    /// Record the white-box Frank-Wolfe gap at trace rows (requires a
    /// gap diagnostic to be supplied).
    pub record_gap: bool,
    /// Emit a trace row every this many iterations (row 0 and the final
    /// row are always present).
    pub trace_every: usize,
    /// Stop once the meter reaches this many component evaluations.
    pub query_budget: Option<u64>,
}

impl SolverConfig {
    pub fn validate(&self, n: usize) {
        assert!(self.p > 0.0 && self.p <= 1.0, "p must be in (0, 1]");
        assert!(self.b >= 1, "b must be at least 1");
        assert!(
            self.sample_size >= 1 && self.sample_size <= n,
            "sample size must be in [1, n]"
        );
        assert!(self.t_iters >= 1, "need at least one iteration");
        assert!(self.trace_every >= 1, "trace_every must be at least 1");
    }
}

/// Observer invoked at every trace row with the record and the iterate.
pub type RowHook<'a> = &'a mut dyn FnMut(&TraceRecord, &DenseVector);

/// Optional run diagnostics: a white-box gap evaluator and a per-row
/// observer. Neither touches the query meter.
#[derive(Default)]
pub struct Instruments<'a> {
    pub gap_fn: Option<&'a dyn Fn(&DenseVector) -> f64>,
    pub row_hook: Option<RowHook<'a>>,
}

/// Result of one solver run.
pub struct SolverRun {
    pub x_final: DenseVector,
    pub trace: Trace,
    /// Branch sequence for solvers with probabilistic updates; empty for
    /// the deterministic baselines.
    pub branches: BranchLog,
}

/// `<grad, x> - <grad, lmo(grad)>`: the Frank-Wolfe stationarity gap at
/// `x` for the supplied (true) gradient. Nonnegative up to rounding.
pub fn fw_gap(grad: &DenseVector, x: &DenseVector, set: &dyn ConstraintSet) -> f64 {
    let s = set.lmo(grad);
    grad.dot(x) - grad.dot(&s)
}
