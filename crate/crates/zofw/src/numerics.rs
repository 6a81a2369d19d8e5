//! Dense/sparse vector arithmetic and the reproducible Gaussian stream
//! shared by every randomized component.
//!
//! All randomness in a run flows through one [`GaussianSampler`]: a
//! ChaCha8 counter-based generator drives `rand_distr`'s ziggurat for
//! standard normals, `rand`'s `[0,1)` double for uniforms, and
//! `random_range` for index draws. Identical seed plus identical draw
//! sequence reproduces identical bits on the same platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense vector of finite `f64` entries.
///
/// Every public operation leaves the entries finite; a NaN or infinity
/// indicates a programming error upstream and aborts.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(d: usize) -> Self {
        DenseVector { values: vec![0.0; d] }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        let v = DenseVector { values };
        v.assert_finite();
        v
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: dimension mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &DenseVector) {
        assert_eq!(self.len(), x.len(), "axpy: dimension mismatch");
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += alpha * v;
        }
        self.assert_finite();
    }

    pub fn scale(&mut self, alpha: f64) {
        for s in &mut self.values {
            *s *= alpha;
        }
        self.assert_finite();
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.len(), other.len(), "sub: dimension mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        DenseVector::from_vec(values)
    }

    /// Frank-Wolfe step `self = (1 - gamma) * self + gamma * s`.
    pub fn combine(&mut self, gamma: f64, s: &DenseVector) {
        assert_eq!(self.len(), s.len(), "combine: dimension mismatch");
        for (x, v) in self.values.iter_mut().zip(&s.values) {
            *x = (1.0 - gamma) * *x + gamma * v;
        }
        self.assert_finite();
    }

    pub fn assert_finite(&self) {
        for (i, v) in self.values.iter().enumerate() {
            assert!(v.is_finite(), "non-finite entry {v} at index {i}");
        }
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Sparse vector: strictly increasing 0-based indices with paired values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Panics unless indices are strictly increasing and values finite.
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Self {
        assert_eq!(indices.len(), values.len(), "sparse: index/value length mismatch");
        for w in indices.windows(2) {
            assert!(w[0] < w[1], "sparse: indices must be strictly increasing");
        }
        for v in &values {
            assert!(v.is_finite(), "sparse: non-finite value {v}");
        }
        SparseVector { indices, values }
    }

    pub fn empty() -> Self {
        SparseVector { indices: Vec::new(), values: Vec::new() }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }

    /// Dot product against a dense slice, touching only stored indices.
    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            let i = i as usize;
            assert!(i < x.len(), "sparse dot: index {i} out of range for dim {}", x.len());
            acc += v * x[i];
        }
        acc
    }

    /// `out[i] += alpha * self[i]` over stored indices.
    pub fn add_scaled_to(&self, alpha: f64, out: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] += alpha * v;
        }
    }

    pub fn norm2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Column-major `d x b` matrix of iid standard normals.
#[derive(Clone, Debug)]
pub struct GaussianMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GaussianMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `U^T v`, one entry per column.
    pub fn transpose_apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "transpose_apply: dimension mismatch");
        (0..self.cols)
            .map(|j| {
                self.column(j)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `U c`: linear combination of columns. This is how `U U^T g` is
    /// applied everywhere; the `d x d` product is never materialized.
    pub fn apply(&self, coeffs: &[f64]) -> DenseVector {
        assert_eq!(coeffs.len(), self.cols, "apply: dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &c) in coeffs.iter().enumerate() {
            for (o, u) in out.iter_mut().zip(self.column(j)) {
                *o += c * u;
            }
        }
        DenseVector::from_vec(out)
    }
}

/// Seedable source for every random draw of a run.
///
/// `draws` counts emitted values (normals, uniforms, and index draws all
/// advance it by one), which pins the documented draw order of a solver
/// run: the matrix for an update is drawn column by column, then the
/// branch uniform, then any minibatch indices.
pub struct GaussianSampler {
    rng: ChaCha8Rng,
    seed: u64,
    draws: u64,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        GaussianSampler { rng: ChaCha8Rng::seed_from_u64(seed), seed, draws: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index draw over empty range");
        self.draws += 1;
        self.rng.random_range(0..n)
    }

    /// `d x b` matrix of iid standard normals, filled column by column,
    /// advancing the stream by exactly `d * b` draws.
    pub fn gaussian_matrix(&mut self, d: usize, b: usize) -> GaussianMatrix {
        assert!(d >= 1 && b >= 1, "gaussian_matrix: sizes must be positive");
        let mut data = Vec::with_capacity(d * b);
        for _ in 0..d * b {
            data.push(self.normal());
        }
        GaussianMatrix { rows: d, cols: b, data }
    }
}
