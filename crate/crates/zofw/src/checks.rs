//! Seeded Monte-Carlo self-checks of the statistical identities the
//! solver's update rules rely on. The benchmark CLI's `verify` command
//! and the acceptance suite both run these.

use crate::estimators::VrTracker;
use crate::numerics::{DenseVector, GaussianSampler};
use crate::objectives::{BlackBox, QuadraticObjective, WhiteBoxObjective};

/// One check outcome: an estimate that must land in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl CheckReport {
    fn banded(name: String, estimate: f64, lo: f64, hi: f64) -> Self {
        let passed = estimate >= lo && estimate <= hi;
        CheckReport { name, estimate, lo, hi, passed }
    }
}

/// Second-moment identity of the Gaussian projection:
/// `E ||alpha U U^T x - x||^2 = (1 + alpha^2 b (d+b+1) - 2 b alpha) ||x||^2`,
/// checked by Monte Carlo to a relative tolerance.
pub fn uux_identity_check(
    d: usize,
    b: usize,
    alpha: f64,
    samples: usize,
    rel_tol: f64,
    seed: u64,
) -> CheckReport {
    let mut sampler = GaussianSampler::new(seed);
    let x = DenseVector::from_vec((0..d).map(|_| sampler.normal()).collect());
    let norm_sq = x.norm2_sq();
    let target = (1.0 + alpha * alpha * (b * (d + b + 1)) as f64 - 2.0 * b as f64 * alpha) * norm_sq;

    let mut acc = 0.0;
    for _ in 0..samples {
        let u = sampler.gaussian_matrix(d, b);
        let mut y = u.apply(&u.transpose_apply(x.as_slice()));
        y.scale(alpha);
        y.axpy(-1.0, &x);
        acc += y.norm2_sq();
    }
    let estimate = acc / samples as f64;
    CheckReport::banded(
        format!("uux-identity d={d} b={b} alpha={alpha:.6}"),
        estimate,
        target * (1.0 - rel_tol),
        target * (1.0 + rel_tol),
    )
}

/// Moment band `d^{p/2} <= E||u||^p <= (d+p)^{p/2}` for `u ~ N(0, I_d)`,
/// allowing 3 standard errors of Monte-Carlo slack on each side.
pub fn gaussian_moment_check(d: usize, p: u32, samples: usize, seed: u64) -> CheckReport {
    assert!(p >= 2 && p.is_multiple_of(2));
    let mut sampler = GaussianSampler::new(seed);
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..samples {
        let mut n2 = 0.0;
        for _ in 0..d {
            let v = sampler.normal();
            n2 += v * v;
        }
        let m = n2.powi(p as i32 / 2);
        acc += m;
        acc_sq += m * m;
    }
    let mean = acc / samples as f64;
    let var = (acc_sq / samples as f64 - mean * mean).max(0.0);
    let se = (var / samples as f64).sqrt();
    let lo = (d as f64).powf(p as f64 / 2.0) - 3.0 * se;
    let hi = ((d + p as usize) as f64).powf(p as f64 / 2.0) + 3.0 * se;
    CheckReport::banded(format!("gaussian-moment d={d} p={p}"), mean, lo, hi)
}

/// Two-point bias bound on `h(x) = x^4`: the residual
/// `tau = (h(x+mu u) - h(x-mu u) - 2 mu h'(x) u) / (2 mu)` must satisfy
/// `|tau| <= L mu u^2 / 2` with `L` the curvature bound on the probed
/// segment. Reports the worst ratio over random trials.
pub fn tau_bias_bound_check(trials: usize, seed: u64) -> CheckReport {
    let mut sampler = GaussianSampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = 4.0 * (sampler.uniform() - 0.5);
        let u = 6.0 * (sampler.uniform() - 0.5);
        let mu = 1e-4 + sampler.uniform();
        let h = |v: f64| v.powi(4);
        let tau = (h(x + mu * u) - h(x - mu * u) - 2.0 * mu * 4.0 * x.powi(3) * u) / (2.0 * mu);
        let reach = (x - mu * u).abs().max((x + mu * u).abs());
        let l_local = 12.0 * reach * reach;
        let bound = l_local * mu * u * u / 2.0;
        if bound > 0.0 {
            worst = worst.max(tau.abs() / bound);
        }
    }
    CheckReport::banded(format!("tau-bias-bound trials={trials}"), worst, 0.0, 1.0 + 1e-9)
}

/// Frozen-point variance contraction of the mixed tracker update.
///
/// With the iterate pinned (both points of the difference equal) and a
/// negligible smoothing radius on a quadratic objective, the replica
/// mean of `||g_t - grad f||^2` must decay per step by at least
/// `p b / (bound_denom (d+b+1))`, tested one-sided at 3 standard errors
/// of the paired per-replica differences. `bound_denom = 8` is the
/// production bound; the true decay is `p b / (d+b+1)`, so denominators
/// below 1 produce a deliberately failing (negative-control) claim.
#[allow(clippy::too_many_arguments)]
pub fn frozen_contraction_check(
    d: usize,
    b: usize,
    p: f64,
    sample_size: usize,
    replicas: usize,
    steps: usize,
    bound_denom: f64,
    seed: u64,
) -> CheckReport {
    let obj = QuadraticObjective::new(1.0, d);
    let x = DenseVector::from_vec(vec![0.1; d]);
    let grad = obj.gradient(&x);
    let mu = 1e-8;
    let bound = 1.0 - p * b as f64 / (bound_denom * (d + b + 1) as f64);

    // errs[k][r] = squared tracker error of replica r after k steps.
    let mut errs = vec![vec![0.0f64; replicas]; steps + 1];
    #[allow(clippy::needless_range_loop)]
    for r in 0..replicas {
        let bb = BlackBox::new(&obj);
        let mut sampler = GaussianSampler::new(seed.wrapping_add(r as u64));
        let u0 = sampler.gaussian_matrix(d, b);
        let mut tracker = VrTracker::init(&bb, &x, &u0, mu, p, sample_size).expect("finite quadratic");
        errs[0][r] = tracker.estimate().sub(&grad).norm2_sq();
        for k in 0..steps {
            let u = sampler.gaussian_matrix(d, b);
            let z = sampler.uniform();
            if z < p {
                tracker.full_update(&bb, &x, &u, mu).expect("finite quadratic");
            } else {
                let sample: Vec<usize> = (0..sample_size).map(|_| sampler.index(d)).collect();
                tracker.minibatch_update(&bb, &x, &x, &sample, &u, mu).expect("finite quadratic");
            }
            errs[k + 1][r] = tracker.estimate().sub(&grad).norm2_sq();
        }
    }

    // One-sided paired test per step: mean(e_{k+1} - bound * e_k) <= 3 SE.
    let mut passed = true;
    for k in 0..steps {
        let diffs: Vec<f64> = (0..replicas).map(|r| errs[k + 1][r] - bound * errs[k][r]).collect();
        let mean = diffs.iter().sum::<f64>() / replicas as f64;
        let var = diffs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (replicas - 1) as f64;
        let se = (var / replicas as f64).sqrt();
        if mean > 3.0 * se {
            passed = false;
        }
    }

    let start: f64 = errs[0].iter().sum::<f64>() / replicas as f64;
    let end: f64 = errs[steps].iter().sum::<f64>() / replicas as f64;
    let measured_factor = (end / start).powf(1.0 / steps as f64);
    CheckReport {
        name: format!("frozen-contraction d={d} b={b} p={p} |S|={sample_size} denom={bound_denom}"),
        estimate: measured_factor,
        lo: 0.0,
        hi: bound,
        passed,
    }
}

/// The full suite at default sizes; every report must pass.
pub fn default_suite(seed: u64) -> Vec<CheckReport> {
    default_suite_with_contraction_denom(seed, 8.0)
}

/// Same suite with the contraction denominator exposed, for the
/// negative-control mode of the verify command.
pub fn default_suite_with_contraction_denom(seed: u64, denom: f64) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let mut k = 0u64;
    for &d in &[5usize, 20] {
        for &b in &[1usize, 4] {
            for &alpha in &[1.0 / (d + b + 1) as f64, 1.0 / b as f64] {
                k += 1;
                reports.push(uux_identity_check(d, b, alpha, 100_000, 0.05, seed + k));
            }
        }
    }
    for &p in &[2u32, 4, 6] {
        k += 1;
        reports.push(gaussian_moment_check(10, p, 200_000, seed + k));
    }
    k += 1;
    reports.push(tau_bias_bound_check(10_000, seed + k));
    k += 1;
    reports.push(frozen_contraction_check(10, 2, 0.5, 1, 10_000, 8, denom, seed + k));
    k += 1;
    reports.push(frozen_contraction_check(20, 4, 0.2, 2, 10_000, 8, denom, seed + k));
    reports
}
