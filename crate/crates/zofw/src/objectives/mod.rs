//! Finite-sum objectives `f(x) = (1/n) sum_i f_i(x)`.
//!
//! Solvers only ever hold a [`BlackBox`] view, which exposes component
//! values and meters every evaluation. Analytic gradients live behind
//! the separate [`WhiteBoxObjective`] trait and are reserved for tests,
//! the projected-gradient reference solver, and gap diagnostics; they
//! never touch the meter.

mod attack;
mod correntropy;
mod logistic;
mod quadratic;

pub use attack::{parse_attack_model, synth_attack_toy, write_attack_model, AttackModel, SoftmaxAttackObjective};
pub use correntropy::CorrentropyObjective;
pub use logistic::LogisticObjective;
pub use quadratic::QuadraticObjective;

use crate::data::Dataset;
use crate::numerics::{DenseVector, GaussianSampler, SparseVector};
use std::cell::Cell;

/// Query-only access to a finite sum of `n` components on `R^d`.
pub trait FiniteSumObjective {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    /// Value of `f_i(x)`. Index bounds are a caller bug.
    fn component(&self, i: usize, x: &DenseVector) -> f64;
}

/// Smoothness constants: `l_full` for the average `f`, `l_hat` for the
/// worst single component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothness {
    pub l_full: f64,
    pub l_hat: f64,
}

/// Analytic-gradient capability, deliberately separate from the
/// query-only surface.
pub trait WhiteBoxObjective: FiniteSumObjective {
    fn component_gradient(&self, i: usize, x: &DenseVector) -> DenseVector;

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let n = self.num_components();
        let mut g = DenseVector::zeros(self.dim());
        for i in 0..n {
            g.axpy(1.0, &self.component_gradient(i, x));
        }
        g.scale(1.0 / n as f64);
        g
    }

    /// Unmetered full objective value, for traces and references.
    fn full_value(&self, x: &DenseVector) -> f64 {
        let n = self.num_components();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.component(i, x);
        }
        acc / n as f64
    }

    fn smoothness(&self) -> Smoothness;
}

/// Counter of component evaluations routed through the black-box view.
/// Incremented by exactly one per call, never decremented.
#[derive(Debug, Default)]
pub struct QueryMeter {
    count: Cell<u64>,
}

impl QueryMeter {
    pub fn new() -> Self {
        QueryMeter { count: Cell::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }

    fn tick(&self) {
        self.count.set(self.count.get() + 1);
    }
}

/// The metered, function-values-only view solvers are allowed to hold.
pub struct BlackBox<'a> {
    obj: &'a dyn FiniteSumObjective,
    meter: QueryMeter,
}

impl<'a> BlackBox<'a> {
    pub fn new(obj: &'a dyn FiniteSumObjective) -> Self {
        BlackBox { obj, meter: QueryMeter::new() }
    }

    pub fn num_components(&self) -> usize {
        self.obj.num_components()
    }

    pub fn dim(&self) -> usize {
        self.obj.dim()
    }

    pub fn queries(&self) -> u64 {
        self.meter.count()
    }

    /// `f_i(x)`; one metered query.
    pub fn eval_component(&self, i: usize, x: &DenseVector) -> f64 {
        assert!(i < self.obj.num_components(), "component index {i} out of range");
        assert_eq!(x.len(), self.obj.dim(), "eval_component: dimension mismatch");
        self.meter.tick();
        self.obj.component(i, x)
    }

    /// `(1/n) sum_i f_i(x)` in index order; meters `n` queries.
    pub fn eval_full(&self, x: &DenseVector) -> f64 {
        let n = self.obj.num_components();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.eval_component(i, x);
        }
        acc / n as f64
    }

    /// Diagnostic-only full value that bypasses the meter, so trace rows
    /// do not distort query accounting.
    pub fn eval_full_unmetered(&self, x: &DenseVector) -> f64 {
        let n = self.obj.num_components();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.obj.component(i, x);
        }
        acc / n as f64
    }
}

/// Synthetic logistic data: sparse Gaussian features and labels planted
/// by a Gaussian weight vector, flipped with probability `label_noise`.
///
/// Draw order per seed: the planted vector (`d` normals), then for each
/// row each feature draws one uniform (keep if below `sparsity`) and,
/// when kept, one normal; finally one uniform decides the label flip.
pub fn synth_logistic(
    nsamples: usize,
    d: usize,
    sparsity: f64,
    label_noise: f64,
    sampler: &mut GaussianSampler,
) -> (Dataset, DenseVector) {
    assert!(nsamples >= 1 && d >= 1);
    assert!((0.0..=1.0).contains(&sparsity), "sparsity must be in [0,1]");
    assert!((0.0..=1.0).contains(&label_noise), "label_noise must be in [0,1]");

    let mut planted = DenseVector::zeros(d);
    for i in 0..d {
        planted[i] = sampler.normal();
    }

    let mut rows = Vec::with_capacity(nsamples);
    let mut labels = Vec::with_capacity(nsamples);
    for _ in 0..nsamples {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for j in 0..d {
            if sampler.uniform() < sparsity {
                indices.push(j as u32);
                values.push(sampler.normal());
            }
        }
        let row = SparseVector::new(indices, values);
        let margin = row.dot_dense(planted.as_slice());
        let mut y = if margin >= 0.0 { 1.0 } else { -1.0 };
        if sampler.uniform() < label_noise {
            y = -y;
        }
        rows.push(row);
        labels.push(y);
    }

    let ds = Dataset { rows, labels, dim: d, name: format!("synth-logistic-{nsamples}x{d}") };
    (ds, planted)
}
