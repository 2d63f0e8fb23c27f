//! Blind source separation with the orthogonal extended infomax algorithm.
//!
//! The crate covers the whole simulation workflow: seeded sub/super-Gaussian
//! mixtures ([`simulate`]), centering and PCA whitening ([`preprocess`]), the
//! multiplicative orthogonal-group update ([`ogextinf`]), the natural-gradient
//! extended infomax baseline ([`extinf`]), and Amari-distance scoring with
//! benchmark aggregation ([`metrics`], [`benchmark`]).
//!
//! Data matrices are `channels × samples`. Covariances divide by the sample
//! count `t`.

// `!(x > 0.0)`-style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod convergence;
pub mod error;
pub mod extinf;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod nonlinearity;
pub mod ogextinf;
pub mod pipeline;
pub mod preprocess;
pub mod simulate;

pub use convergence::{Algorithm, ConvergenceRecord, IcaResult, IterationRecord};
pub use error::{IcaError, Result};
pub use matrix::DataMatrix;
pub use nalgebra::{DMatrix, DVector};
pub use nonlinearity::Sign;
