//! Secret-key rates and security thresholds for one-way and two-way
//! continuous-variable QKD under collective Gaussian (entangling-cloner) attacks.
//!
//! * [`gaussian`]: covariance matrices, symplectic spectra, entropies, conditioning.
//! * [`attacks`]: the entangling cloner and a correlated two-path attack family.
//! * [`key_rates`]: closed-form asymptotic rates, the exact finite-modulation engine,
//!   and the protocol registry.
//! * [`thresholds`]: tolerable excess noise versus transmission, crossovers.
//! * [`simulator`]: seeded Monte-Carlo of the prepare-and-measure protocols.
//! * [`tomography`]: Gaussian channel estimation and the reducibility test.
//!
//! All variances are in shot-noise units (vacuum variance 1) and all
//! information quantities in bits unless converted with [`gaussian::LogBase`].

// `!(x >= a)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod error;
pub mod gaussian;
pub mod key_rates;
pub mod output;
pub mod simulator;
pub mod thresholds;
pub mod tomography;

pub use error::{Error, Result};
