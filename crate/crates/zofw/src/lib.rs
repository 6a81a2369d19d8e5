//! Zeroth-order constrained optimization over finite sums: Frank-Wolfe
//! solvers driven by two-point Gaussian gradient estimates with double
//! variance reduction, plus the constraint oracles, losses, dataset
//! tooling, and statistical self-checks that back the benchmark CLI.
//!
//! Determinism contract: every randomized computation is parameterized
//! by a single 64-bit seed feeding one ChaCha8 stream per run, and all
//! draws happen in a documented order, so traces reproduce bit-for-bit
//! on a platform.

pub mod checks;
pub mod constraints;
pub mod data;
pub mod estimators;
pub mod numerics;
pub mod objectives;
pub mod solvers;
pub mod trace;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("non-finite objective value: {context}")]
    NonFinite { context: String },
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the solver iteration to numeric failures so black-box
    /// errors point at a step, not just a probe.
    pub fn with_iteration(self, t: usize) -> Self {
        match self {
            Error::NonFinite { context } => {
                Error::NonFinite { context: format!("iteration {t}: {context}") }
            }
            other => other,
        }
    }
}
