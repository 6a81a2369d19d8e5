//! Binary logistic loss over a sparse dataset.

use super::{FiniteSumObjective, Smoothness, WhiteBoxObjective};
use crate::data::Dataset;
use crate::numerics::DenseVector;
use crate::Error;

/// `f_i(x) = log(1 + exp(-y_i x.z_i))` with `y_i` in `{-1,+1}`.
pub struct LogisticObjective {
    dataset: Dataset,
    /// `||z_i||^2 / 4` per row; the max is the component smoothness.
    component_l: Vec<f64>,
}

/// Numerically stable `log(1 + exp(-t))`.
fn softplus_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LogisticObjective {
    pub fn new(dataset: Dataset) -> Result<Self, Error> {
        if dataset.is_empty() {
            return Err(Error::Config("logistic objective needs at least one row".into()));
        }
        for &y in &dataset.labels {
            if y != 1.0 && y != -1.0 {
                return Err(Error::Config(format!(
                    "logistic labels must be -1 or +1; found {y} (apply label scaling first)"
                )));
            }
        }
        let component_l = dataset.rows.iter().map(|r| r.norm2_sq() / 4.0).collect();
        Ok(LogisticObjective { dataset, component_l })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn component_smoothness(&self) -> &[f64] {
        &self.component_l
    }
}

impl FiniteSumObjective for LogisticObjective {
    fn num_components(&self) -> usize {
        self.dataset.len()
    }

    fn dim(&self) -> usize {
        self.dataset.dim
    }

    fn component(&self, i: usize, x: &DenseVector) -> f64 {
        let margin = self.dataset.labels[i] * self.dataset.rows[i].dot_dense(x.as_slice());
        softplus_neg(margin)
    }
}

impl WhiteBoxObjective for LogisticObjective {
    fn component_gradient(&self, i: usize, x: &DenseVector) -> DenseVector {
        let y = self.dataset.labels[i];
        let row = &self.dataset.rows[i];
        let margin = y * row.dot_dense(x.as_slice());
        // d/dx log(1+exp(-y x.z)) = -y sigmoid(-y x.z) z
        let coeff = -y * sigmoid(-margin);
        let mut g = DenseVector::zeros(self.dim());
        row.add_scaled_to(coeff, g.as_mut_slice());
        g
    }

    fn smoothness(&self) -> Smoothness {
        let l_hat = self.component_l.iter().fold(0.0f64, |m, &v| m.max(v));
        // Trace bound on the Hessian of the average: mean ||z_i||^2 / 4.
        let mean = self.component_l.iter().sum::<f64>() / self.component_l.len() as f64;
        Smoothness { l_full: mean.min(l_hat), l_hat }
    }
}
