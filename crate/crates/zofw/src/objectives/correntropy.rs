//! Correntropy-induced robust loss over a sparse dataset.

use super::{FiniteSumObjective, Smoothness, WhiteBoxObjective};
use crate::data::Dataset;
use crate::numerics::DenseVector;
use crate::Error;

/// `f_i(x) = 50 (1 - exp(-(y_i - x.z_i)^2 / 100))`, non-convex, bounded
/// in `[0, 50)`. Labels are real-valued.
pub struct CorrentropyObjective {
    dataset: Dataset,
}

impl CorrentropyObjective {
    pub fn new(dataset: Dataset) -> Result<Self, Error> {
        if dataset.is_empty() {
            return Err(Error::Config("correntropy objective needs at least one row".into()));
        }
        Ok(CorrentropyObjective { dataset })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }
}

impl FiniteSumObjective for CorrentropyObjective {
    fn num_components(&self) -> usize {
        self.dataset.len()
    }

    fn dim(&self) -> usize {
        self.dataset.dim
    }

    fn component(&self, i: usize, x: &DenseVector) -> f64 {
        let r = self.dataset.labels[i] - self.dataset.rows[i].dot_dense(x.as_slice());
        50.0 * (1.0 - (-r * r / 100.0).exp())
    }
}

impl WhiteBoxObjective for CorrentropyObjective {
    fn component_gradient(&self, i: usize, x: &DenseVector) -> DenseVector {
        let row = &self.dataset.rows[i];
        let r = self.dataset.labels[i] - row.dot_dense(x.as_slice());
        // d/dx 50(1 - exp(-r^2/100)) = -r exp(-r^2/100) z
        let coeff = -r * (-r * r / 100.0).exp();
        let mut g = DenseVector::zeros(self.dim());
        row.add_scaled_to(coeff, g.as_mut_slice());
        g
    }

    fn smoothness(&self) -> Smoothness {
        // |phi''(r)| = |exp(-r^2/100) (1 - r^2/50)| <= 1, so the row norm
        // squared bounds each component curvature.
        let norms: Vec<f64> = self.dataset.rows.iter().map(|r| r.norm2_sq()).collect();
        let l_hat = norms.iter().fold(0.0f64, |m, &v| m.max(v));
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        Smoothness { l_full: mean.min(l_hat), l_hat }
    }
}
