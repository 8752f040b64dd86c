//! Symplectic algebra for Gaussian states in shot-noise units.
//!
//! Quadratures are ordered `(Q1, P1, ..., Qn, Pn)` with `[Y_l, Y_m] = 2i Omega_lm`,
//! so the vacuum has unit variance in every quadrature.

mod conditioning;
mod entropy;
mod matrix;
mod spectrum;
mod transform;

pub use conditioning::{condition_on_heterodyne, condition_on_homodyne, Quadrature};
pub use entropy::{g_entropy, log_negativity_epr, von_neumann_entropy, LogBase};
pub use matrix::{epr_cm, omega, thermal_cm, vacuum_cm, CovarianceMatrix, DisplacementVector, SymplecticForm};
pub use spectrum::{symplectic_eigenvalues, symplectic_spectrum_of, SymplecticSpectrum};
pub use transform::{apply_transform, beam_splitter, SymplecticTransform};

/// Tolerance on the uncertainty principle `nu >= 1`.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Absolute symmetry tolerance, scaled by the largest entry when that exceeds one.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative tolerance used when matching the `+/- i nu` eigenvalue pairs of `Omega V`.
pub const PAIRING_TOL: f64 = 1e-8;
