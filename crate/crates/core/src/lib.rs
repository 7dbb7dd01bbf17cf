//! Generalized multiple Fourier coefficients over Legendre and
//! trigonometric bases, truncated expansions of iterated Itô and
//! Stratonovich integrals of multiplicity up to three, and the path-based
//! oracles used to check them.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below fix the usual double-precision instantiation.

pub mod analysis;
pub mod basis;
pub mod coefficients;
pub mod error;
pub mod expansion;
pub mod gaussians;
pub mod oracle;
pub mod quadrature;
pub mod scalar;

pub use analysis::{
    identity_suite, identity_suite_with, mse_study, residual_rate, Claim, ConvergenceReport, IdentityReport,
};
pub use basis::{BasisKind, BasisSpec, Interval};
pub use coefficients::{build_tensor, coeff_double, coeff_single, coeff_triple, CoefficientTensor, WeightExponents};
pub use error::{Error, Result};
pub use expansion::{Calculus, IntegralSpec, TruncationOrder};
pub use gaussians::{draw_block, GaussianBlock, Provenance};
pub use oracle::{simulate_path, WienerPath};
pub use scalar::Scalar;

pub type IntervalF64 = Interval<f64>;
pub type BasisSpecF64 = BasisSpec<f64>;
pub type CoefficientTensorF64 = CoefficientTensor<f64>;
pub type GaussianBlockF64 = GaussianBlock<f64>;
pub type WienerPathF64 = WienerPath<f64>;
pub type IntegralSpecF64 = IntegralSpec<f64>;

pub type IntervalF32 = Interval<f32>;
pub type BasisSpecF32 = BasisSpec<f32>;
pub type CoefficientTensorF32 = CoefficientTensor<f32>;
pub type GaussianBlockF32 = GaussianBlock<f32>;
