//! Noisy correlation matrices built from structured templates.
//!
//! The crate adds controlled noise to template correlation matrices
//! (constant-correlation blocks, Toeplitz blocks, hub-Toeplitz blocks, or any
//! positive-definite correlation matrix) such that the result is again a
//! correlation matrix with an explicit upper bound on its condition number.
//!
//! Modules:
//! - [`spectra`]: dense symmetric storage, Jacobi eigenvalues, Cholesky,
//!   Geršgorin intervals and correlation validity checks.
//! - [`templates`]: template construction and analytic spectral certificates.
//! - [`noise`]: unit-vector noise generators and the perturbation recipes.
//! - [`baseline`]: Gaussian sample-correlation comparison arm.
//! - [`clustereval`]: PAM clustering sensitivity pipeline.
//! - [`cli`]: configuration schema, file formats and the command runner.

// `!(x > 0.0)` style guards reject NaN on purpose; index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod cli;
pub mod clustereval;
mod error;
pub mod noise;
pub mod rng;
pub mod spectra;
pub mod templates;

pub use error::{Error, Result};
pub use spectra::{Spectrum, SymmetricMatrix, ValidityReport};
pub use templates::{CorrelationTemplate, GroupSpec, SpectralBounds, StructureKind};
