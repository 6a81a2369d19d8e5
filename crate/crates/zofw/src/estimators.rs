//! Zeroth-order gradient estimators and the refined tracker that keeps
//! a running gradient estimate under double variance reduction.
//!
//! The two-point estimator along a direction `u` is
//! `(h(x + mu u) - h(x - mu u)) / (2 mu) * u`; the batch form averages
//! it over the columns of a Gaussian matrix. The tracker mixes a
//! projection-corrected full refresh (probability `p`) with cheap
//! minibatch difference updates, reusing one fresh matrix and one
//! smoothing radius for both points of a difference.

use crate::numerics::{DenseVector, GaussianMatrix};
use crate::objectives::BlackBox;
use crate::Error;

/// Smallest usable smoothing radius: below this the central difference
/// underflows in double precision, so schedules clamp here.
pub const MU_FLOOR: f64 = 1e-12;

/// Directions-per-estimate and smoothing radius for one batch estimate.
#[derive(Clone, Copy, Debug)]
pub struct TwoPointConfig {
    pub b: usize,
    pub mu: f64,
}

impl TwoPointConfig {
    pub fn new(b: usize, mu: f64) -> Self {
        assert!(b >= 1, "need at least one direction");
        assert!(mu >= MU_FLOOR, "smoothing radius {mu} below floor {MU_FLOOR}");
        TwoPointConfig { b, mu }
    }
}

fn check_finite(value: f64, side: &str, mu: f64) -> Result<f64, Error> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { context: format!("objective returned {value} at x {side} mu*u (mu={mu:e})") })
    }
}

/// Two-point estimate along a single direction; exactly 2 queries to `h`.
pub fn estimate_direction<H: FnMut(&DenseVector) -> f64>(
    h: &mut H,
    x: &DenseVector,
    u: &[f64],
    mu: f64,
) -> Result<DenseVector, Error> {
    let coeff = direction_coefficient(h, x, u, mu)?;
    let mut out = DenseVector::zeros(x.len());
    for (o, &ui) in out.as_mut_slice().iter_mut().zip(u) {
        *o = coeff * ui;
    }
    Ok(out)
}

/// `(h(x + mu u) - h(x - mu u)) / (2 mu)`, the scalar part of the
/// two-point estimate.
fn direction_coefficient<H: FnMut(&DenseVector) -> f64>(
    h: &mut H,
    x: &DenseVector,
    u: &[f64],
    mu: f64,
) -> Result<f64, Error> {
    assert!(mu >= MU_FLOOR, "smoothing radius {mu} below floor {MU_FLOOR}");
    assert_eq!(x.len(), u.len(), "estimate: dimension mismatch");
    let mut probe = x.clone();
    for (p, &ui) in probe.as_mut_slice().iter_mut().zip(u) {
        *p += mu * ui;
    }
    let plus = check_finite(h(&probe), "+", mu)?;
    for (p, (&xi, &ui)) in probe.as_mut_slice().iter_mut().zip(x.as_slice().iter().zip(u)) {
        *p = xi - mu * ui;
    }
    let minus = check_finite(h(&probe), "-", mu)?;
    Ok((plus - minus) / (2.0 * mu))
}

/// Batch estimate `(1/b) sum_j (two-point along column j)`; exactly `2 b`
/// queries. The result is assembled as `U c / b`, one coefficient per
/// column, in column order.
pub fn estimate_batch<H: FnMut(&DenseVector) -> f64>(
    h: &mut H,
    x: &DenseVector,
    u: &GaussianMatrix,
    mu: f64,
) -> Result<DenseVector, Error> {
    assert_eq!(u.rows(), x.len(), "estimate_batch: dimension mismatch");
    let b = u.cols();
    let mut coeffs = Vec::with_capacity(b);
    for j in 0..b {
        coeffs.push(direction_coefficient(h, x, u.column(j), mu)? / b as f64);
    }
    Ok(u.apply(&coeffs))
}

/// Central difference along every coordinate axis; exactly `2 d` queries.
pub fn coordinate_estimate<H: FnMut(&DenseVector) -> f64>(
    h: &mut H,
    x: &DenseVector,
    mu: f64,
) -> Result<DenseVector, Error> {
    assert!(mu >= MU_FLOOR, "smoothing radius {mu} below floor {MU_FLOOR}");
    let d = x.len();
    let mut out = DenseVector::zeros(d);
    let mut probe = x.clone();
    for i in 0..d {
        probe[i] = x[i] + mu;
        let plus = check_finite(h(&probe), "+", mu)?;
        probe[i] = x[i] - mu;
        let minus = check_finite(h(&probe), "-", mu)?;
        probe[i] = x[i];
        out[i] = (plus - minus) / (2.0 * mu);
    }
    Ok(out)
}

/// Which update the tracker took at an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateBranch {
    Full,
    Minibatch,
}

/// Per-iteration branch record; the exact query count of a run is a
/// closed form over this sequence.
pub type BranchLog = Vec<UpdateBranch>;

/// Running refined gradient estimate `g_t` plus the shape parameters of
/// its update rule.
#[derive(Clone, Debug)]
pub struct VrTracker {
    g: DenseVector,
    dim: usize,
    b: usize,
    p: f64,
    sample_size: usize,
}

impl VrTracker {
    /// `g_0` is a batch estimate of the full average at `x_0`; costs
    /// `2 n b` component queries.
    pub fn init(
        view: &BlackBox,
        x0: &DenseVector,
        u0: &GaussianMatrix,
        mu0: f64,
        p: f64,
        sample_size: usize,
    ) -> Result<Self, Error> {
        assert!(p > 0.0 && p <= 1.0, "branch probability must be in (0, 1]");
        assert!(
            sample_size >= 1 && sample_size <= view.num_components(),
            "sample size must be in [1, n]"
        );
        let g = estimate_batch(&mut |x| view.eval_full(x), x0, u0, mu0)?;
        Ok(VrTracker { g, dim: x0.len(), b: u0.cols(), p, sample_size, })
    }

    pub fn estimate(&self) -> &DenseVector {
        &self.g
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Full refresh with projection correction:
    /// `g <- g + b/(d+b+1) batch_estimate(f, x_next) - U U^T g / (d+b+1)`,
    /// applied as `U (U^T g)`. Costs `2 n b` queries.
    pub fn full_update(
        &mut self,
        view: &BlackBox,
        x_next: &DenseVector,
        u: &GaussianMatrix,
        mu: f64,
    ) -> Result<(), Error> {
        assert_eq!(u.cols(), self.b, "matrix column count changed mid-run");
        let ghat = estimate_batch(&mut |x| view.eval_full(x), x_next, u, mu)?;
        let scale = 1.0 / (self.dim + self.b + 1) as f64;
        let correction = u.apply(&u.transpose_apply(self.g.as_slice()));
        self.g.axpy(self.b as f64 * scale, &ghat);
        self.g.axpy(-scale, &correction);
        Ok(())
    }

    /// Minibatch difference update over sampled component indices, using
    /// the same matrix and radius at both points:
    /// `g <- g + (1/|S|) sum_{i in S} (est f_i(x_next) - est f_i(x_prev))`.
    /// Costs `4 b |S|` queries; duplicate indices are evaluated
    /// independently.
    pub fn minibatch_update(
        &mut self,
        view: &BlackBox,
        x_prev: &DenseVector,
        x_next: &DenseVector,
        sample: &[usize],
        u: &GaussianMatrix,
        mu: f64,
    ) -> Result<(), Error> {
        assert_eq!(sample.len(), self.sample_size, "sample size changed mid-run");
        let mut acc = DenseVector::zeros(self.dim);
        for &i in sample {
            let plus = estimate_batch(&mut |x| view.eval_component(i, x), x_next, u, mu)?;
            let minus = estimate_batch(&mut |x| view.eval_component(i, x), x_prev, u, mu)?;
            acc.axpy(1.0, &plus);
            acc.axpy(-1.0, &minus);
        }
        self.g.axpy(1.0 / sample.len() as f64, &acc);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GaussianSampler;
    use crate::objectives::{BlackBox, QuadraticObjective, WhiteBoxObjective};

    fn quad_h(x: &DenseVector) -> f64 {
        0.5 * x.norm2_sq()
    }

    #[test]
    fn linear_function_is_estimated_exactly() {
        let c = [2.0, -3.0, 0.5];
        let mut h = |x: &DenseVector| c.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        let x = DenseVector::from_vec(vec![0.3, 1.0, -2.0]);
        let u = [1.5, -0.7, 0.2];
        let est = estimate_direction(&mut h, &x, &u, 0.37).unwrap();
        let cu: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
        for i in 0..3 {
            assert!((est[i] - cu * u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_direction_estimate_is_directional_derivative() {
        let mut h = quad_h;
        let x = DenseVector::from_vec(vec![1.0, 0.0]);
        let u = [1.0, 1.0];
        let est = estimate_direction(&mut h, &x, &u, 0.3).unwrap();
        // (u.x) u = (1, 1)
        assert!((est[0] - 1.0).abs() < 1e-13);
        assert!((est[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn quartic_one_dimensional_value() {
        let mut h = |x: &DenseVector| x[0].powi(4);
        let x = DenseVector::from_vec(vec![1.0]);
        let est = estimate_direction(&mut h, &x, &[1.0], 0.1).unwrap();
        assert!((est[0] - 4.04).abs() < 1e-12, "got {}", est[0]);
    }

    #[test]
    fn batch_equals_projected_gradient_on_quadratics() {
        let mut s = GaussianSampler::new(17);
        for _ in 0..20 {
            let d = 5;
            let b = 3;
            let x = DenseVector::from_vec((0..d).map(|_| s.normal()).collect());
            let u = s.gaussian_matrix(d, b);
            let mu = 0.05 + 0.5 * s.uniform();
            let est = estimate_batch(&mut quad_h, &x, &u, mu).unwrap();
            // grad h = x, so the estimate must be U U^T x / b exactly.
            let expect = u.apply(&u.transpose_apply(x.as_slice()));
            for i in 0..d {
                assert!((est[i] - expect[i] / b as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn batch_of_one_reduces_to_single_direction() {
        let mut s = GaussianSampler::new(23);
        let x = DenseVector::from_vec(vec![0.4, -1.2, 2.0]);
        let u = s.gaussian_matrix(3, 1);
        let batch = estimate_batch(&mut quad_h, &x, &u, 0.2).unwrap();
        let single = estimate_direction(&mut quad_h, &x, u.column(0), 0.2).unwrap();
        assert_eq!(batch.as_slice(), single.as_slice());
    }

    #[test]
    fn batch_mean_over_fresh_matrices_approaches_gradient() {
        let mut s = GaussianSampler::new(29);
        let x = DenseVector::from_vec(vec![1.0, -0.5, 0.25]);
        let trials = 100_000;
        let mut mean = DenseVector::zeros(3);
        for _ in 0..trials {
            let u = s.gaussian_matrix(3, 2);
            mean.axpy(1.0 / trials as f64, &estimate_batch(&mut quad_h, &x, &u, 0.1).unwrap());
        }
        // Var of one (U U^T x / b)_i is bounded by ~ (2 x_i^2 + ||x||^2)/b;
        // a loose 3-sigma band with ||x||^2 = 1.3125 is plenty.
        let sigma = ((2.0 * 1.0 + 1.3125) / 2.0f64 / trials as f64).sqrt();
        for i in 0..3 {
            assert!(
                (mean[i] - x[i]).abs() <= 3.0 * sigma.max(1e-3),
                "component {i}: {} vs {}",
                mean[i],
                x[i]
            );
        }
    }

    #[test]
    fn coordinate_estimate_is_exact_on_quadratics_and_linears() {
        let x = DenseVector::from_vec(vec![0.7, -1.1, 0.3]);
        let est = coordinate_estimate(&mut quad_h, &x, 0.05).unwrap();
        for i in 0..3 {
            assert!((est[i] - x[i]).abs() < 1e-12);
        }
        let c = [4.0, -1.0, 2.5];
        let mut lin = |x: &DenseVector| c.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        let est = coordinate_estimate(&mut lin, &x, 0.05).unwrap();
        for i in 0..3 {
            assert!((est[i] - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_estimate_quartic_value() {
        let mut h = |x: &DenseVector| x[0].powi(4);
        let est = coordinate_estimate(&mut h, &DenseVector::from_vec(vec![1.0]), 0.1).unwrap();
        assert!((est[0] - 4.04).abs() < 1e-12);
    }

    #[test]
    fn non_finite_value_surfaces_as_error() {
        let mut h = |x: &DenseVector| if x[0] > 1.0 { f64::NAN } else { x[0] };
        let x = DenseVector::from_vec(vec![1.0]);
        let err = estimate_direction(&mut h, &x, &[1.0], 0.5).unwrap_err();
        assert!(err.to_string().contains("NaN"));
    }

    #[test]
    fn tracker_init_at_origin_of_even_function_is_zero() {
        let obj = QuadraticObjective::new(1.0, 2);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(7);
        let u0 = s.gaussian_matrix(2, 3);
        let t = VrTracker::init(&bb, &DenseVector::zeros(2), &u0, 1e-3, 0.5, 1).unwrap();
        assert_eq!(t.estimate().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn tracker_init_meters_two_n_b() {
        let obj = QuadraticObjective::new(1.0, 10);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(7);
        let u0 = s.gaussian_matrix(10, 4);
        let _ = VrTracker::init(&bb, &DenseVector::zeros(10), &u0, 1e-3, 0.5, 1).unwrap();
        assert_eq!(bb.queries(), 80);
    }

    #[test]
    fn tracker_init_is_bit_deterministic() {
        let obj = QuadraticObjective::new(0.5, 6);
        let run = |seed| {
            let bb = BlackBox::new(&obj);
            let mut s = GaussianSampler::new(seed);
            let x0 = DenseVector::from_vec((0..6).map(|i| 0.1 * i as f64).collect());
            let u0 = s.gaussian_matrix(6, 2);
            VrTracker::init(&bb, &x0, &u0, 1e-4, 0.5, 2).unwrap().estimate().clone()
        };
        assert_eq!(run(42).as_slice(), run(42).as_slice());
    }

    #[test]
    fn full_update_fixes_exact_gradient() {
        let obj = QuadraticObjective::new(1.0, 4);
        let bb = BlackBox::new(&obj);
        let x = DenseVector::from_vec(vec![0.5, -0.2, 0.1, 0.9]);
        let mut s = GaussianSampler::new(31);
        let u0 = s.gaussian_matrix(4, 2);
        let mut t = VrTracker::init(&bb, &DenseVector::zeros(4), &u0, 1e-6, 0.5, 1).unwrap();
        // Force g to the exact gradient, then one full update must keep it.
        t.g = obj.gradient(&x);
        let before = t.g.clone();
        let u = s.gaussian_matrix(4, 2);
        t.full_update(&bb, &x, &u, 1e-6).unwrap();
        for i in 0..4 {
            assert!(
                (t.g[i] - before[i]).abs() <= 1e-9 * before[i].abs().max(1.0),
                "fixed point drifted at {i}: {} vs {}",
                t.g[i],
                before[i]
            );
        }
    }

    #[test]
    fn full_update_meters_two_n_b() {
        let obj = QuadraticObjective::new(1.0, 10);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(33);
        let u0 = s.gaussian_matrix(10, 4);
        let mut t = VrTracker::init(&bb, &DenseVector::zeros(10), &u0, 1e-4, 0.5, 1).unwrap();
        let base = bb.queries();
        let u = s.gaussian_matrix(10, 4);
        t.full_update(&bb, &DenseVector::zeros(10), &u, 1e-4).unwrap();
        assert_eq!(bb.queries() - base, 80);
    }

    #[test]
    fn full_update_expectation_blends_toward_gradient() {
        // E[g+] = g + b/(d+b+1) (grad - g) over fresh matrices (tau = 0).
        let obj = QuadraticObjective::new(1.0, 3);
        let bb = BlackBox::new(&obj);
        let x = DenseVector::from_vec(vec![1.0, -1.0, 0.5]);
        let grad = obj.gradient(&x);
        let (d, b) = (3usize, 2usize);
        let blend = b as f64 / (d + b + 1) as f64;
        let g0 = DenseVector::from_vec(vec![0.3, 0.8, -0.2]);
        let trials = 40_000;
        let mut s = GaussianSampler::new(37);
        let mut mean = DenseVector::zeros(3);
        for _ in 0..trials {
            let mut t = VrTracker {
                g: g0.clone(),
                dim: d,
                b,
                p: 0.5,
                sample_size: 1,
            };
            let u = s.gaussian_matrix(d, b);
            t.full_update(&bb, &x, &u, 1e-7).unwrap();
            mean.axpy(1.0 / trials as f64, &t.g);
        }
        for i in 0..3 {
            let expect = g0[i] + blend * (grad[i] - g0[i]);
            // 3-sigma with a conservative per-sample std bound of ~1.5.
            let band = 3.0 * 1.5 / (trials as f64).sqrt();
            assert!(
                (mean[i] - expect).abs() <= band,
                "component {i}: {} vs {expect} (band {band})",
                mean[i]
            );
        }
    }

    #[test]
    fn minibatch_update_with_equal_points_is_identity() {
        let obj = QuadraticObjective::new(1.0, 5);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(41);
        let u0 = s.gaussian_matrix(5, 2);
        let x = DenseVector::from_vec(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let mut t = VrTracker::init(&bb, &x, &u0, 1e-5, 0.5, 3).unwrap();
        let before = t.g.clone();
        let u = s.gaussian_matrix(5, 2);
        t.minibatch_update(&bb, &x, &x, &[0, 2, 2], &u, 1e-5).unwrap();
        assert_eq!(t.g.as_slice(), before.as_slice(), "cancellation must be exact");
    }

    #[test]
    fn minibatch_update_meters_four_b_sample_size() {
        let obj = QuadraticObjective::new(1.0, 6);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(43);
        let u0 = s.gaussian_matrix(6, 2);
        let x = DenseVector::zeros(6);
        let mut t = VrTracker::init(&bb, &x, &u0, 1e-5, 0.5, 3).unwrap();
        let base = bb.queries();
        let u = s.gaussian_matrix(6, 2);
        let y = DenseVector::from_vec(vec![0.1; 6]);
        t.minibatch_update(&bb, &x, &y, &[1, 3, 5], &u, 1e-5).unwrap();
        assert_eq!(bb.queries() - base, 24);
    }

    #[test]
    fn minibatch_update_matches_projected_difference_on_quadratics() {
        let obj = QuadraticObjective::new(0.8, 5);
        let bb = BlackBox::new(&obj);
        let mut s = GaussianSampler::new(47);
        let u0 = s.gaussian_matrix(5, 3);
        let xp = DenseVector::from_vec(vec![0.1, -0.4, 0.2, 0.0, 0.3]);
        let xn = DenseVector::from_vec(vec![0.5, 0.1, -0.2, 0.2, -0.1]);
        let mut t = VrTracker::init(&bb, &xp, &u0, 0.08, 0.5, 2).unwrap();
        let before = t.g.clone();
        let u = s.gaussian_matrix(5, 3);
        let sample = [4usize, 1usize];
        t.minibatch_update(&bb, &xp, &xn, &sample, &u, 0.08).unwrap();

        // Oracle: (1/|S|) sum (1/b) U U^T (grad f_i(xn) - grad f_i(xp)).
        let mut expect = DenseVector::zeros(5);
        for &i in &sample {
            let diff = obj.component_gradient(i, &xn).sub(&obj.component_gradient(i, &xp));
            let proj = u.apply(&u.transpose_apply(diff.as_slice()));
            expect.axpy(1.0 / (sample.len() as f64 * 3.0), &proj);
        }
        for i in 0..5 {
            assert!(
                ((t.g[i] - before[i]) - expect[i]).abs() < 1e-12,
                "delta mismatch at {i}"
            );
        }
    }

    #[test]
    fn tau_bias_is_bounded_by_local_smoothness() {
        // tau on h(x) = x^4 equals 4 x mu^2 u^3; the bound uses the local
        // curvature 12 max(|x-mu u|, |x+mu u|)^2 on the probed segment.
        let mut s = GaussianSampler::new(53);
        for _ in 0..2000 {
            let x = 4.0 * (s.uniform() - 0.5);
            let u = 6.0 * (s.uniform() - 0.5);
            let mu = 1e-4 + s.uniform();
            let h = |v: f64| v.powi(4);
            let grad = 4.0 * x.powi(3);
            let tau = (h(x + mu * u) - h(x - mu * u) - 2.0 * mu * grad * u) / (2.0 * mu);
            let reach = (x - mu * u).abs().max((x + mu * u).abs());
            let l_local = 12.0 * reach * reach;
            assert!(
                tau.abs() <= l_local * mu * u * u / 2.0 + 1e-9,
                "tau {tau} breaks bound at x={x} u={u} mu={mu}"
            );
        }
    }
}
