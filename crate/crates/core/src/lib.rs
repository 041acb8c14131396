//! Extremal dependence between paired samples of curves.
//!
//! Given `n` pairs of curves `(X_i, Y_i)` sampled on a common regular grid,
//! the crate estimates how the *shapes* of simultaneously extreme curves
//! relate, using only the pairs whose radius `||X_i|| v ||Y_i||` is among the
//! `k` largest:
//!
//! * [`ecc::extremal_covariance`], [`ecc::extremal_correlation`] and
//!   [`ecc::angular_dependence`] evaluate the estimators for a given `k`;
//! * [`ecc::estimate_pipeline`] runs the full procedure: centering, marginal
//!   tail fits, a power transformation to a common tail index when needed,
//!   and a data-driven choice of `k`;
//! * [`tail`] holds the Hill estimator and the two `k`-selection rules;
//! * [`simulate`] holds models with a closed-form extremal correlation and
//!   a reproducible Monte Carlo bias harness;
//! * [`chi`] computes the scalar diagnostics `chi(q)` and `chibar(q)` on
//!   curve norms.
//!
//! ```
//! use ecc_core::curves::{FunctionalSample, PairedSample};
//! use ecc_core::ecc::extremal_correlation;
//!
//! let x = FunctionalSample::from_rows(vec![vec![3.0], vec![1.0], vec![0.5]])?;
//! let y = FunctionalSample::from_rows(vec![vec![3.0], vec![-1.0], vec![0.5]])?;
//! let pairs = PairedSample::new(x, y)?;
//! assert!((extremal_correlation(&pairs, 2)? - 0.8).abs() < 1e-12);
//! # Ok::<(), ecc_core::Error>(())
//! ```
//!
//! The `book/` directory at the repository root walks through the concepts;
//! its code listings are compiled and run as doctests of this crate.

pub mod chi;
pub mod curves;
pub mod ecc;
mod error;
pub mod simulate;
mod sum;
pub mod tail;
pub mod transform;

pub use error::{Error, Result};

// Book chapters and the README are checked by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/tail.md")]
    mod tail {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/chi.md")]
    mod chi {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
