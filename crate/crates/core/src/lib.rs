//! Spectral solution, observability inequalities and boundary control for the
//! one-dimensional wave equation with two exponential memory kernels
//!
//! ```text
//! u_tt = gamma^2 u_xx - int_0^t (b1 e^{-r1 (t-s)} + b2 e^{-r2 (t-s)}) gamma^2 u_xx(s) ds
//! ```
//!
//! on `(0, pi)`, with `b1/r1 + b2/r2 = 1` and `r1 + r2 > b1 + b2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters and the sine eigenbasis.
//! * [`spectrum`]: per-mode characteristic roots, gap statistics, control time.
//! * [`modal`]: amplitudes of the nonharmonic modal expansion.
//! * [`series`]: solution field, boundary traces, and an independent time stepper.
//! * [`ingham`]: weight function, kernel transform, inverse and direct inequalities.
//! * [`control`]: adjoint traces, Gram matrix, control synthesis and verification.

pub mod control;
pub mod error;
pub mod ingham;
pub mod modal;
pub mod model;
pub mod quadrature;
pub mod series;
pub mod spectrum;

pub use error::{Error, ErrorClass, Result};
pub use modal::{ModalCoefficients, RemainderReport};
pub use model::{InitialData, ModelParams, Normalization, SpectralBasis};
pub use num_complex::Complex64;
pub use spectrum::{ModalRoots, SpectralLimits};

/// Canonical parameter set `(gamma, b1, b2, r1, r2) = (1, 0.05, 0.15, 0.1, 0.3)`.
pub fn canonical_params() -> ModelParams {
    ModelParams::new(1.0, 0.05, 0.15, 0.1, 0.3).expect("canonical parameters are admissible")
}
