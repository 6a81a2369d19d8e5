//! Bounded convex constraint sets with linear minimization oracles,
//! Euclidean projections, and diameters.
//!
//! The conventions that make traces deterministic: LMO ties break to the
//! smallest index, `sign(0)` counts as `+1`, and the l2 oracle returns
//! the center for a zero gradient.

use crate::numerics::DenseVector;

pub trait ConstraintSet {
    /// `argmin_{s in X} <s, g>`.
    fn lmo(&self, g: &DenseVector) -> DenseVector;

    /// Euclidean projection onto the set.
    fn project(&self, x: &DenseVector) -> DenseVector;

    /// Diameter `R = max ||x - x'||_2` over the set.
    fn diameter(&self) -> f64;

    /// Membership up to a relative tolerance on the set's norm.
    fn contains(&self, x: &DenseVector, tol: f64) -> bool;

    /// Feasible starting point; the center for both ball types.
    fn origin(&self, d: usize) -> DenseVector {
        DenseVector::zeros(d)
    }
}

/// `{ x : ||x||_1 <= r }`.
#[derive(Clone, Copy, Debug)]
pub struct L1Ball {
    pub r: f64,
}

impl L1Ball {
    pub fn new(r: f64) -> Self {
        assert!(r > 0.0, "l1 radius must be positive");
        L1Ball { r }
    }
}

impl ConstraintSet for L1Ball {
    fn lmo(&self, g: &DenseVector) -> DenseVector {
        // Vertex opposing the largest-magnitude coordinate; strict
        // comparison keeps the smallest index on ties.
        let mut best = 0usize;
        for (i, v) in g.as_slice().iter().enumerate().skip(1) {
            if v.abs() > g[best].abs() {
                best = i;
            }
        }
        let sign = if g[best] < 0.0 { -1.0 } else { 1.0 };
        let mut s = DenseVector::zeros(g.len());
        s[best] = -self.r * sign;
        s
    }

    fn project(&self, x: &DenseVector) -> DenseVector {
        if x.norm1() <= self.r {
            return x.clone();
        }
        // Sort-based simplex projection of |x|: find the soft threshold
        // theta with sum max(|x_i| - theta, 0) = r.
        let mut mags: Vec<f64> = x.as_slice().iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        let mut cumsum = 0.0;
        let mut theta = 0.0;
        for (k, &m) in mags.iter().enumerate() {
            cumsum += m;
            let candidate = (cumsum - self.r) / (k + 1) as f64;
            if candidate >= m {
                break;
            }
            theta = candidate;
        }
        let values = x
            .as_slice()
            .iter()
            .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
            .collect();
        DenseVector::from_vec(values)
    }

    fn diameter(&self) -> f64 {
        // Opposite vertices r e_i and -r e_i.
        2.0 * self.r
    }

    fn contains(&self, x: &DenseVector, tol: f64) -> bool {
        x.norm1() <= self.r * (1.0 + tol)
    }
}

/// `{ x : ||x||_2 <= r }`.
#[derive(Clone, Copy, Debug)]
pub struct L2Ball {
    pub r: f64,
}

impl L2Ball {
    pub fn new(r: f64) -> Self {
        assert!(r > 0.0, "l2 radius must be positive");
        L2Ball { r }
    }
}

impl ConstraintSet for L2Ball {
    fn lmo(&self, g: &DenseVector) -> DenseVector {
        let norm = g.norm2();
        if norm == 0.0 {
            // The center is a valid minimizer of a zero objective.
            return DenseVector::zeros(g.len());
        }
        let mut s = g.clone();
        s.scale(-self.r / norm);
        s
    }

    fn project(&self, x: &DenseVector) -> DenseVector {
        let norm = x.norm2();
        if norm <= self.r {
            return x.clone();
        }
        let mut p = x.clone();
        p.scale(self.r / norm);
        p
    }

    fn diameter(&self) -> f64 {
        2.0 * self.r
    }

    fn contains(&self, x: &DenseVector, tol: f64) -> bool {
        x.norm2() <= self.r * (1.0 + tol)
    }
}
