//! Universal adversarial-perturbation loss against a fixed linear
//! softmax classifier, with the tanh reparameterization that keeps
//! perturbed images inside the valid pixel box.

use super::{FiniteSumObjective, Smoothness, WhiteBoxObjective};
use crate::numerics::{DenseVector, GaussianSampler};
use crate::Error;

/// Margin before an image coordinate is clamped away from the box edge
/// so `atanh(2 z)` stays finite.
const PIXEL_CLAMP: f64 = 1e-6;

/// Fixed linear softmax model: `K x d` weights plus a bias per class.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackModel {
    pub classes: usize,
    pub dim: usize,
    /// Row-major `classes x dim`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl AttackModel {
    pub fn scores(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.dim);
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &c)| row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + c)
            .collect()
    }

    /// Predicted class: largest raw score, smallest index on ties.
    pub fn predict(&self, w: &[f64]) -> usize {
        let scores = self.scores(w);
        let mut best = 0;
        for (j, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = j;
            }
        }
        best
    }
}

/// Parses the plain-text model format: first line `K d`, then `K` rows
/// of `d + 1` reals (weights then bias).
pub fn parse_attack_model(text: &str) -> Result<AttackModel, Error> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, col: 1, message: "empty model file".into() })?;
    let mut head = header.split_whitespace();
    let parse_usize = |tok: Option<&str>, what: &str| -> Result<usize, Error> {
        tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            message: format!("model header must be \"K d\"; bad {what}"),
        })
    };
    let classes = parse_usize(head.next(), "class count")?;
    let dim = parse_usize(head.next(), "dimension")?;
    if classes < 2 || dim < 1 {
        return Err(Error::Parse { line: 1, col: 1, message: format!("degenerate model {classes}x{dim}") });
    }

    let mut weights = Vec::with_capacity(classes);
    let mut bias = Vec::with_capacity(classes);
    for k in 0..classes {
        let (line_no, row) = lines.next().ok_or_else(|| Error::Parse {
            line: k + 2,
            col: 1,
            message: format!("expected {classes} weight rows, found {k}"),
        })?;
        let vals: Result<Vec<f64>, Error> = row
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line: line_no + 1,
                    col: 1,
                    message: format!("invalid real {t:?} in weight row"),
                })
            })
            .collect();
        let vals = vals?;
        if vals.len() != dim + 1 {
            return Err(Error::Parse {
                line: line_no + 1,
                col: 1,
                message: format!("weight row has {} entries, expected {}", vals.len(), dim + 1),
            });
        }
        bias.push(vals[dim]);
        weights.push(vals[..dim].to_vec());
    }
    Ok(AttackModel { classes, dim, weights, bias })
}

pub fn write_attack_model(model: &AttackModel) -> String {
    let mut out = format!("{} {}\n", model.classes, model.dim);
    for (row, &c) in model.weights.iter().zip(&model.bias) {
        let mut parts: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        parts.push(format!("{c}"));
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// `f_i(x) = logsoftmax_{y_i}(F(w(z_i,x))) - max_{j != y_i} logsoftmax_j`
/// where `w(z,x) = tanh(atanh(2 z) + x) / 2` elementwise. Negative loss
/// means the perturbed image is misclassified.
pub struct SoftmaxAttackObjective {
    model: AttackModel,
    images: Vec<DenseVector>,
    labels: Vec<usize>,
    /// `atanh(2 z_i)` with pixels clamped into the open box.
    atanh_images: Vec<Vec<f64>>,
}

fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let lse = max + scores.iter().map(|&s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|&s| s - lse).collect()
}

impl SoftmaxAttackObjective {
    pub fn new(model: AttackModel, images: Vec<DenseVector>, labels: Vec<usize>) -> Result<Self, Error> {
        if images.is_empty() {
            return Err(Error::Config("attack objective needs at least one target image".into()));
        }
        if images.len() != labels.len() {
            return Err(Error::Config("attack: image/label count mismatch".into()));
        }
        for img in &images {
            if img.len() != model.dim {
                return Err(Error::Config(format!(
                    "attack: image dimension {} does not match model dimension {}",
                    img.len(),
                    model.dim
                )));
            }
            for v in img.as_slice() {
                if !(-0.5..=0.5).contains(v) {
                    return Err(Error::Config(format!("attack: pixel {v} outside [-0.5, 0.5]")));
                }
            }
        }
        for &y in &labels {
            if y >= model.classes {
                return Err(Error::Config(format!(
                    "attack: label {y} out of range for {} classes",
                    model.classes
                )));
            }
        }
        let lim = 0.5 - PIXEL_CLAMP;
        let atanh_images = images
            .iter()
            .map(|img| {
                img.as_slice()
                    .iter()
                    .map(|&z| (2.0 * z.clamp(-lim, lim)).atanh())
                    .collect()
            })
            .collect();
        Ok(SoftmaxAttackObjective { model, images, labels, atanh_images })
    }

    pub fn model(&self) -> &AttackModel {
        &self.model
    }

    pub fn images(&self) -> &[DenseVector] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Perturbed image `w(z_i, x)`, always inside the open pixel box.
    pub fn perturbed(&self, i: usize, x: &DenseVector) -> Vec<f64> {
        self.atanh_images[i]
            .iter()
            .zip(x.as_slice())
            .map(|(&u, &xv)| 0.5 * (u + xv).tanh())
            .collect()
    }

    /// Runner-up class: best log-softmax among `j != y`, smallest index
    /// on ties.
    fn runner_up(log_probs: &[f64], y: usize) -> usize {
        let mut best = usize::MAX;
        for (j, &lp) in log_probs.iter().enumerate() {
            if j == y {
                continue;
            }
            if best == usize::MAX || lp > log_probs[best] {
                best = j;
            }
        }
        best
    }

    /// Fraction of target images the model misclassifies after applying
    /// the perturbation. Diagnostic only; does not touch any meter.
    pub fn attack_success_rate(&self, x: &DenseVector) -> f64 {
        let mut hits = 0usize;
        for i in 0..self.images.len() {
            let w = self.perturbed(i, x);
            if self.model.predict(&w) != self.labels[i] {
                hits += 1;
            }
        }
        hits as f64 / self.images.len() as f64
    }
}

impl FiniteSumObjective for SoftmaxAttackObjective {
    fn num_components(&self) -> usize {
        self.images.len()
    }

    fn dim(&self) -> usize {
        self.model.dim
    }

    fn component(&self, i: usize, x: &DenseVector) -> f64 {
        let w = self.perturbed(i, x);
        let lp = log_softmax(&self.model.scores(&w));
        let y = self.labels[i];
        let j = Self::runner_up(&lp, y);
        lp[y] - lp[j]
    }
}

impl WhiteBoxObjective for SoftmaxAttackObjective {
    fn component_gradient(&self, i: usize, x: &DenseVector) -> DenseVector {
        let w = self.perturbed(i, x);
        let lp = log_softmax(&self.model.scores(&w));
        let y = self.labels[i];
        let j = Self::runner_up(&lp, y);
        // The log-softmax normalizer cancels in the margin, so the
        // w-gradient is W_y - W_j; chain through dw/dx = (1 - tanh^2)/2.
        let wy = &self.model.weights[y];
        let wj = &self.model.weights[j];
        let mut g = DenseVector::zeros(self.dim());
        for l in 0..self.dim() {
            let u = self.atanh_images[i][l] + x[l];
            let t = u.tanh();
            g[l] = (wy[l] - wj[l]) * 0.5 * (1.0 - t * t);
        }
        g
    }

    fn smoothness(&self) -> Smoothness {
        // Per-piece curvature bound: the margin Hessian is diagonal with
        // entries |W_y - W_j|_l |tanh''(u)| / 2 and |tanh''| <= 4/(3 sqrt 3).
        let mut max_diff = 0.0f64;
        for a in 0..self.model.classes {
            for b in (a + 1)..self.model.classes {
                for l in 0..self.model.dim {
                    max_diff = max_diff.max((self.model.weights[a][l] - self.model.weights[b][l]).abs());
                }
            }
        }
        let l = max_diff * 2.0 / (3.0 * 3.0f64.sqrt());
        Smoothness { l_full: l, l_hat: l }
    }
}

/// Deterministic desk-scale attack instance: a `k`-class linear softmax
/// on `d` pixels plus `n_targets` correctly classified images of class 0.
///
/// Images sit near their class direction with mild Gaussian texture;
/// draws that the model misclassifies are discarded and redrawn.
pub fn synth_attack_toy(
    sampler: &mut GaussianSampler,
    k: usize,
    d: usize,
    n_targets: usize,
) -> (AttackModel, Vec<DenseVector>, Vec<usize>) {
    assert!(k >= 2 && d >= 2 && n_targets >= 1);
    // Unit class directions, scaled into score weights.
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<f64> = (0..d).map(|_| sampler.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        dirs.push(v);
    }
    let weights: Vec<Vec<f64>> = dirs.iter().map(|v| v.iter().map(|x| 2.0 * x).collect()).collect();
    let model = AttackModel { classes: k, dim: d, weights, bias: vec![0.0; k] };

    let mut images = Vec::with_capacity(n_targets);
    let mut labels = Vec::with_capacity(n_targets);
    while images.len() < n_targets {
        let img: Vec<f64> = dirs[0]
            .iter()
            .map(|&u| (0.22 * u + 0.06 * sampler.normal()).clamp(-0.45, 0.45))
            .collect();
        if model.predict(&img) == 0 {
            images.push(DenseVector::from_vec(img));
            labels.push(0);
        }
    }
    (model, images, labels)
}
