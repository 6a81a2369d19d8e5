//! White-box projected gradient descent, used only to pin the reference
//! optimal value that objective-gap traces are measured against.

use super::fw_gap;
use crate::constraints::ConstraintSet;
use crate::numerics::DenseVector;
use crate::objectives::WhiteBoxObjective;

#[derive(Clone, Debug)]
pub struct PgdResult {
    pub x_star: DenseVector,
    pub f_star: f64,
    /// Frank-Wolfe gap at the returned point; a certificate that it is
    /// (near-)stationary for the constrained problem.
    pub certificate_gap: f64,
    pub iterations: usize,
}

/// Projected gradient descent with a grow-on-success, halve-on-failure
/// step size. Never touches any query meter. Returns the best iterate.
pub fn pgd_reference<O: WhiteBoxObjective + ?Sized>(
    obj: &O,
    set: &dyn ConstraintSet,
    iters: usize,
    lr0: f64,
) -> PgdResult {
    assert!(iters >= 1 && lr0 > 0.0);
    let d = obj.dim();
    let mut x = set.origin(d);
    let mut fx = obj.full_value(&x);
    let mut lr = lr0;
    let mut done = 0;

    for _ in 0..iters {
        done += 1;
        let g = obj.gradient(&x);
        let mut accepted = false;
        while lr > 1e-18 {
            let mut cand = x.clone();
            cand.axpy(-lr, &g);
            let cand = set.project(&cand);
            let fc = obj.full_value(&cand);
            if fc < fx {
                x = cand;
                fx = fc;
                lr *= 1.5;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            break; // step size exhausted: stationary to float precision
        }
    }

    let certificate_gap = fw_gap(&obj.gradient(&x), &x, set);
    PgdResult { x_star: x, f_star: fx, certificate_gap, iterations: done }
}
