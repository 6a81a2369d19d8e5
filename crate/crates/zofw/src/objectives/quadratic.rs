//! Quadratic test objective whose component and average smoothness
//! constants are known in closed form and far apart.

use super::{FiniteSumObjective, Smoothness, WhiteBoxObjective};
use crate::numerics::DenseVector;

/// `f_i(x) = ||x||^2 / 2 + (n/2) a x_i^2` with `d = n`, so that
/// `f(x) = (1+a) ||x||^2 / 2`. Each component is `(1 + n a)`-smooth while
/// the average is only `(1 + a)`-smooth.
pub struct QuadraticObjective {
    a: f64,
    n: usize,
}

impl QuadraticObjective {
    pub fn new(a: f64, n: usize) -> Self {
        assert!(a > 0.0, "quadratic coefficient must be positive");
        assert!(n >= 1);
        QuadraticObjective { a, n }
    }

    pub fn l_full(&self) -> f64 {
        1.0 + self.a
    }

    pub fn l_hat(&self) -> f64 {
        1.0 + self.n as f64 * self.a
    }
}

impl FiniteSumObjective for QuadraticObjective {
    fn num_components(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn component(&self, i: usize, x: &DenseVector) -> f64 {
        0.5 * x.norm2_sq() + 0.5 * self.n as f64 * self.a * x[i] * x[i]
    }
}

impl WhiteBoxObjective for QuadraticObjective {
    fn component_gradient(&self, i: usize, x: &DenseVector) -> DenseVector {
        let mut g = x.clone();
        g[i] += self.n as f64 * self.a * x[i];
        g
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = x.clone();
        g.scale(1.0 + self.a);
        g
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness { l_full: self.l_full(), l_hat: self.l_hat() }
    }
}
