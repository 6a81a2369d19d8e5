//! Step-size and smoothing-radius schedules.

use crate::estimators::MU_FLOOR;

/// Step size `gamma_t` for the Frank-Wolfe update.
#[derive(Clone, Debug)]
pub enum GammaSchedule {
    /// Constant at `p b / (8 (d + b + 1))` for the first half of the
    /// horizon (or the whole run when the horizon is short), then decays
    /// as `2 / (16 (d + b + 1) / (p b) + t - t0)` with `t0 = ceil(T/2)`.
    TwoPhase { p: f64, b: usize, d: usize, t_total: usize },
    /// `1 / sqrt(T)` throughout.
    InvSqrt { t_total: usize },
    /// `min(1, lr / (t + 1))`.
    Harmonic { lr: f64 },
    /// Fixed value in `[0, 1]`; `0` freezes the iterate.
    Constant { gamma: f64 },
}

impl GammaSchedule {
    pub fn two_phase(p: f64, b: usize, d: usize, t_total: usize) -> Self {
        assert!(p > 0.0 && p <= 1.0 && b >= 1 && d >= 1 && t_total >= 1);
        GammaSchedule::TwoPhase { p, b, d, t_total }
    }

    pub fn inv_sqrt(t_total: usize) -> Self {
        assert!(t_total >= 1);
        GammaSchedule::InvSqrt { t_total }
    }

    pub fn harmonic(lr: f64) -> Self {
        assert!(lr > 0.0);
        GammaSchedule::Harmonic { lr }
    }

    pub fn constant(gamma: f64) -> Self {
        assert!((0.0..=1.0).contains(&gamma), "constant step must be in [0, 1]");
        GammaSchedule::Constant { gamma }
    }

    pub fn at(&self, t: usize) -> f64 {
        match *self {
            GammaSchedule::TwoPhase { p, b, d, t_total } => {
                let a = 8.0 * (d + b + 1) as f64 / (p * b as f64);
                let base = 1.0 / a;
                let t0 = t_total.div_ceil(2);
                if (t_total as f64) <= a || t < t0 {
                    base
                } else {
                    2.0 / (2.0 * a + (t - t0) as f64)
                }
            }
            GammaSchedule::InvSqrt { t_total } => 1.0 / (t_total as f64).sqrt(),
            GammaSchedule::Harmonic { lr } => (lr / (t + 1) as f64).min(1.0),
            GammaSchedule::Constant { gamma } => gamma,
        }
    }
}

/// Smoothing radius `mu_t`, clamped at [`MU_FLOOR`].
#[derive(Clone, Debug)]
pub enum MuSchedule {
    /// Proportional to the running step size:
    /// `sqrt(p lhat^2 / |S| + 4 p l^2) * R * gamma_t / (d + 6)^{3/2}`.
    GammaScaled { coeff: f64 },
    /// Fixed from the horizon: `sqrt(p / (|S| (d + 6)^3 T)) * R`.
    HorizonScaled { value: f64 },
    Constant { mu: f64 },
}

impl MuSchedule {
    pub fn gamma_scaled(l_full: f64, l_hat: f64, radius: f64, p: f64, sample_size: usize, d: usize) -> Self {
        assert!(l_full >= 0.0 && l_hat >= 0.0 && radius > 0.0);
        assert!(p > 0.0 && p <= 1.0 && sample_size >= 1 && d >= 1);
        let coeff = (p * l_hat * l_hat / sample_size as f64 + 4.0 * p * l_full * l_full).sqrt()
            * radius
            / ((d + 6) as f64).powf(1.5);
        MuSchedule::GammaScaled { coeff }
    }

    pub fn horizon_scaled(radius: f64, p: f64, sample_size: usize, d: usize, t_total: usize) -> Self {
        assert!(radius > 0.0 && p > 0.0 && p <= 1.0 && sample_size >= 1 && d >= 1 && t_total >= 1);
        let value = (p / (sample_size as f64 * ((d + 6) as f64).powi(3) * t_total as f64)).sqrt() * radius;
        MuSchedule::HorizonScaled { value }
    }

    pub fn constant(mu: f64) -> Self {
        assert!(mu >= MU_FLOOR);
        MuSchedule::Constant { mu }
    }

    /// Radius for the step that uses `gamma_t`; the flag reports whether
    /// the floor clamp fired (recorded as a trace warning upstream).
    pub fn at(&self, gamma_t: f64) -> (f64, bool) {
        let raw = match *self {
            MuSchedule::GammaScaled { coeff } => coeff * gamma_t,
            MuSchedule::HorizonScaled { value } => value,
            MuSchedule::Constant { mu } => mu,
        };
        if raw < MU_FLOOR {
            (MU_FLOOR, true)
        } else {
            (raw, false)
        }
    }
}
