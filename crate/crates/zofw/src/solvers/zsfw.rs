//! Zeroth-order stochastic Frank-Wolfe with double variance reduction.

use super::{Instruments, SolverConfig, SolverRun};
use crate::constraints::ConstraintSet;
use crate::estimators::{UpdateBranch, VrTracker};
use crate::numerics::{DenseVector, GaussianSampler};
use crate::objectives::BlackBox;
use crate::trace::{Trace, TraceRecord};
use crate::Error;
use std::time::Instant;

/// One run of the double-variance-reduction solver.
///
/// Per iteration: `s_t = lmo(g_t)`, `x_{t+1} = x_t + gamma_t (s_t - x_t)`,
/// then a fresh `d x b` Gaussian matrix and a uniform `z_t` decide the
/// tracker update: full refresh when `z_t < p`, otherwise a minibatch
/// difference over `|S|` indices sampled uniformly with replacement.
/// Both points of the difference reuse the fresh matrix and the current
/// radius. Draw order per iteration is matrix, then `z_t`, then indices.
pub fn zsfw_dvr(
    view: &BlackBox,
    set: &dyn ConstraintSet,
    cfg: &SolverConfig,
    mut ins: Instruments,
) -> Result<SolverRun, Error> {
    let n = view.num_components();
    let d = view.dim();
    cfg.validate(n);

    let started = Instant::now();
    let mut sampler = GaussianSampler::new(cfg.seed);
    let mut trace = Trace::default();
    let mut branches = Vec::with_capacity(cfg.t_iters);

    let mut x = set.origin(d);
    let gamma0 = cfg.gamma.at(0);
    let (mu0, clamped) = cfg.mu.at(gamma0);
    if clamped {
        trace.warn("smoothing radius clamped to floor at t=0".to_string());
    }
    let u0 = sampler.gaussian_matrix(d, cfg.b);
    let mut tracker = VrTracker::init(view, &x, &u0, mu0, cfg.p, cfg.sample_size)
        .map_err(|e| e.with_iteration(0))?;

    record_row(&mut trace, &mut ins, cfg, view, &x, 0, None, started);

    let mut x_prev = x.clone();
    for t in 0..cfg.t_iters {
        let gamma_t = cfg.gamma.at(t);
        let s = set.lmo(tracker.estimate());
        x_prev.clone_from(&x);
        x.combine(gamma_t, &s);

        let u = sampler.gaussian_matrix(d, cfg.b);
        let z = sampler.uniform();
        let (mu_next, clamped) = cfg.mu.at(cfg.gamma.at(t + 1));
        if clamped {
            trace.warn(format!("smoothing radius clamped to floor at t={}", t + 1));
        }

        let branch = if z < cfg.p {
            tracker
                .full_update(view, &x, &u, mu_next)
                .map_err(|e| e.with_iteration(t))?;
            UpdateBranch::Full
        } else {
            let sample: Vec<usize> = (0..cfg.sample_size).map(|_| sampler.index(n)).collect();
            tracker
                .minibatch_update(view, &x_prev, &x, &sample, &u, mu_next)
                .map_err(|e| e.with_iteration(t))?;
            UpdateBranch::Minibatch
        };
        branches.push(branch);

        let budget_hit = cfg.query_budget.is_some_and(|q| view.queries() >= q);
        let last = t + 1 == cfg.t_iters || budget_hit;
        if (t + 1) % cfg.trace_every == 0 || last {
            record_row(&mut trace, &mut ins, cfg, view, &x, t + 1, Some(branch), started);
        }
        if budget_hit {
            break;
        }
    }

    Ok(SolverRun { x_final: x, trace, branches })
}

#[allow(clippy::too_many_arguments)]
fn record_row(
    trace: &mut Trace,
    ins: &mut Instruments,
    cfg: &SolverConfig,
    view: &BlackBox,
    x: &DenseVector,
    t: usize,
    branch: Option<UpdateBranch>,
    started: Instant,
) {
    let fw_gap = match (&ins.gap_fn, cfg.record_gap) {
        (Some(gap), true) => Some(gap(x)),
        _ => None,
    };
    let rec = TraceRecord {
        t,
        queries: view.queries(),
        f_value: view.eval_full_unmetered(x),
        fw_gap,
        branch,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(hook) = ins.row_hook.as_mut() {
        hook(&rec, x);
    }
    trace.push(rec);
}
