//! Zeroth-order Frank-Wolfe baselines.
//!
//! These are reconstructions in the spirit of the published methods they
//! are compared against, pinned to the exact update rules and query
//! costs documented here:
//!
//! * `zofwgd` - deterministic: coordinate-wise estimate of the full
//!   objective every iteration (`2 d n` queries).
//! * `zofwsgd` - stochastic: batch two-point estimate of a minibatch
//!   average every iteration (`2 b batch` queries).
//! * `acc_szofw` - epoch-based: coordinate-wise refresh every `q`
//!   iterations (`2 d n`), coordinate-wise minibatch differences in
//!   between (`4 d batch`).

use super::{Instruments, SolverConfig, SolverRun};
use crate::constraints::ConstraintSet;
use crate::estimators::{coordinate_estimate, estimate_batch};
use crate::numerics::{DenseVector, GaussianSampler};
use crate::objectives::BlackBox;
use crate::trace::{Trace, TraceRecord};
use crate::Error;
use std::time::Instant;

struct LoopState<'a, 'b> {
    trace: Trace,
    ins: Instruments<'a>,
    view: &'b BlackBox<'b>,
    started: Instant,
    record_gap: bool,
}

impl LoopState<'_, '_> {
    fn record(&mut self, x: &DenseVector, t: usize) {
        let fw_gap = match (&self.ins.gap_fn, self.record_gap) {
            (Some(gap), true) => Some(gap(x)),
            _ => None,
        };
        let rec = TraceRecord {
            t,
            queries: self.view.queries(),
            f_value: self.view.eval_full_unmetered(x),
            fw_gap,
            branch: None,
            elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3,
        };
        if let Some(hook) = self.ins.row_hook.as_mut() {
            hook(&rec, x);
        }
        self.trace.push(rec);
    }
}

fn run_loop<F>(
    view: &BlackBox,
    set: &dyn ConstraintSet,
    cfg: &SolverConfig,
    ins: Instruments,
    mut direction: F,
) -> Result<SolverRun, Error>
where
    F: FnMut(usize, &DenseVector, &DenseVector, f64, &mut Trace) -> Result<DenseVector, Error>,
{
    cfg.validate(view.num_components());
    let mut state = LoopState {
        trace: Trace::default(),
        ins,
        view,
        started: Instant::now(),
        record_gap: cfg.record_gap,
    };
    let mut x = set.origin(view.dim());
    let mut x_prev = x.clone();
    state.record(&x, 0);

    for t in 0..cfg.t_iters {
        let gamma_t = cfg.gamma.at(t);
        let (mu_t, clamped) = cfg.mu.at(gamma_t);
        if clamped {
            state.trace.warn(format!("smoothing radius clamped to floor at t={t}"));
        }
        let v = direction(t, &x, &x_prev, mu_t, &mut state.trace).map_err(|e| e.with_iteration(t))?;
        let s = set.lmo(&v);
        x_prev.clone_from(&x);
        x.combine(gamma_t, &s);

        let budget_hit = cfg.query_budget.is_some_and(|q| view.queries() >= q);
        let last = t + 1 == cfg.t_iters || budget_hit;
        if (t + 1) % cfg.trace_every == 0 || last {
            state.record(&x, t + 1);
        }
        if budget_hit {
            break;
        }
    }

    Ok(SolverRun { x_final: x, trace: state.trace, branches: Vec::new() })
}

/// Deterministic zeroth-order Frank-Wolfe: a coordinate-wise central
/// difference of the full average drives every step.
pub fn zofwgd(
    view: &BlackBox,
    set: &dyn ConstraintSet,
    cfg: &SolverConfig,
    ins: Instruments,
) -> Result<SolverRun, Error> {
    run_loop(view, set, cfg, ins, |_t, x, _x_prev, mu, _trace| {
        coordinate_estimate(&mut |y| view.eval_full(y), x, mu)
    })
}

/// Stochastic zeroth-order Frank-Wolfe: two-point batch estimate of a
/// fresh minibatch average. Draw order per iteration: the `d x b`
/// matrix, then `batch` indices with replacement.
pub fn zofwsgd(
    view: &BlackBox,
    set: &dyn ConstraintSet,
    cfg: &SolverConfig,
    batch: usize,
    ins: Instruments,
) -> Result<SolverRun, Error> {
    assert!(batch >= 1, "batch must be at least 1");
    let n = view.num_components();
    let d = view.dim();
    let mut sampler = GaussianSampler::new(cfg.seed);
    let b = cfg.b;
    run_loop(view, set, cfg, ins, move |_t, x, _x_prev, mu, _trace| {
        let u = sampler.gaussian_matrix(d, b);
        let sample: Vec<usize> = (0..batch).map(|_| sampler.index(n)).collect();
        let mut h = |y: &DenseVector| {
            sample.iter().map(|&i| view.eval_component(i, y)).sum::<f64>() / batch as f64
        };
        estimate_batch(&mut h, x, &u, mu)
    })
}

/// Epoch-based accelerated baseline: coordinate-wise full refresh at
/// `t = 0 (mod q)`, coordinate-wise minibatch differences otherwise.
pub fn acc_szofw(
    view: &BlackBox,
    set: &dyn ConstraintSet,
    cfg: &SolverConfig,
    batch: usize,
    q: usize,
    ins: Instruments,
) -> Result<SolverRun, Error> {
    assert!(batch >= 1, "batch must be at least 1");
    assert!(q >= 1, "epoch length must be at least 1");
    let n = view.num_components();
    let mut sampler = GaussianSampler::new(cfg.seed);
    let mut v = DenseVector::zeros(view.dim());
    run_loop(view, set, cfg, ins, move |t, x, x_prev, mu, _trace| {
        if t % q == 0 {
            v = coordinate_estimate(&mut |y| view.eval_full(y), x, mu)?;
        } else {
            let sample: Vec<usize> = (0..batch).map(|_| sampler.index(n)).collect();
            let mut acc = DenseVector::zeros(x.len());
            for &i in &sample {
                let plus = coordinate_estimate(&mut |y| view.eval_component(i, y), x, mu)?;
                let minus = coordinate_estimate(&mut |y| view.eval_component(i, y), x_prev, mu)?;
                acc.axpy(1.0, &plus);
                acc.axpy(-1.0, &minus);
            }
            v.axpy(1.0 / batch as f64, &acc);
        }
        Ok(v.clone())
    })
}
