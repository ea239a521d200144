//! Floating-point laboratory for commuting rotations of the torus `𝕋^k`.
//!
//! Observables are finite Fourier polynomials, so composition with a rotation only rescales
//! coefficients. Invariance and equality of actions on a frequency reduce to integer arithmetic
//! whenever the rotations are integer multiples of a single angle.

pub mod annexb;
pub mod average;
pub mod fourier;
pub mod numeric;
pub mod system;
pub mod weyl;

pub use annexb::{annexb_experiment, golden_alpha, AnnexBConfig, AnnexBReport, WeylCheck};
pub use average::{decay_constant, multiple_average_fourier, torus_multiple_average, GridAverage};
pub use fourier::FourierObservable;
pub use system::{rotate_observable, Phase, TorusSystem};
pub use weyl::{choose_n, closed_form, convergent_denominators, required_n, weyl_sum, weyl_sum_phase, WeylSum};

use thiserror::Error;

/// `⟨m, β⟩` within this distance of an integer counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("frequency {0:?} appears twice")]
    DuplicateFrequency(Vec<i64>),
    #[error("resonant frequency {freq:?}: phase {phase} is an integer, geometric bound inapplicable")]
    Resonance { freq: Vec<i64>, phase: f64 },
    #[error("weyl sum {value} exceeds its geometric bound {bound}")]
    BoundViolated { value: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
