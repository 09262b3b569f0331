//! Joint active/passive beamforming for RIS-aided multi-user MISO downlink
//! driven by statistical channel state information.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel_model`] synthesises the AP-RIS channel, one-ring spatial
//!   correlation matrices, channel samples, path loss and pilot accounting.
//! * [`ese_metrics`] evaluates SINR, Monte Carlo ergodic spectral efficiency
//!   and the deterministic surrogate used by both optimisers.
//! * [`active_beamforming`] computes the AP precoder (SVD or fractional
//!   programming).
//! * [`passive_beamforming`] optimises the RIS phase vector by projected
//!   gradient ascent and quantises it.
//! * [`pipelines`] composes SVD-GD and FP-GD.
//! * [`matrix_io`] reads and writes matrices in the `RISM` binary container
//!   and in CSV.
//!
//! All linear algebra uses `nalgebra` with `f64` complex entries.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod active_beamforming;
pub mod channel_model;
pub mod error;
pub mod ese_metrics;
pub mod matrix_io;
pub mod passive_beamforming;
pub mod pipelines;
pub mod rng;

pub use nalgebra::Complex;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
