use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// One-mode Gaussian channel acting on first and second moments:
/// `d -> gain d + offset`, `V -> gain V gain^T + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    pub gain: Matrix2<f64>,
    pub noise: Matrix2<f64>,
    pub displacement_offset: Vector2<f64>,
}

impl GaussianChannel {
    /// Checks symmetry of the noise and complete positivity within `1e-10`.
    pub fn new(gain: Matrix2<f64>, noise: Matrix2<f64>, displacement_offset: Vector2<f64>) -> Result<Self> {
        if (noise[(0, 1)] - noise[(1, 0)]).abs() > 1e-10 {
            return Err(Error::NotSymmetric((noise[(0, 1)] - noise[(1, 0)]).abs()));
        }
        let ch = Self::from_parts(gain, noise, displacement_offset);
        let min = ch.cp_min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::NotCompletelyPositive { min_eig: min, allowed: 1e-10 });
        }
        Ok(ch)
    }

    pub(crate) fn from_parts(gain: Matrix2<f64>, noise: Matrix2<f64>, displacement_offset: Vector2<f64>) -> Self {
        let sym = (noise + noise.transpose()) * 0.5;
        Self { gain, noise: sym, displacement_offset }
    }

    pub fn identity() -> Self {
        Self::from_parts(Matrix2::identity(), Matrix2::zeros(), Vector2::zeros())
    }

    /// Alice's encoding map: a pure displacement by `(q, p)`.
    pub fn displacement(q: f64, p: f64) -> Self {
        Self::from_parts(Matrix2::identity(), Matrix2::zeros(), Vector2::new(q, p))
    }

    /// Entangling cloner seen by the honest parties: gain `sqrt(T) I`, noise `(1-T) W I`.
    pub fn lossy_thermal(t: f64, w: f64) -> Self {
        Self::from_parts(Matrix2::identity() * t.sqrt(), Matrix2::identity() * ((1.0 - t) * w), Vector2::zeros())
    }

    /// Smallest eigenvalue of the Hermitian form `noise + i (Omega - gain Omega gain^T)`.
    pub fn cp_min_eigenvalue(&self) -> f64 {
        // For 2x2 matrices gain Omega gain^T = det(gain) Omega.
        let kappa = 1.0 - self.gain.determinant();
        let y = &self.noise;
        let tr = y[(0, 0)] + y[(1, 1)];
        let disc = ((y[(0, 0)] - y[(1, 1)]).powi(2) + 4.0 * (y[(0, 1)].powi(2) + kappa * kappa)).sqrt();
        0.5 * (tr - disc)
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.cp_min_eigenvalue() >= -tol
    }

    pub fn apply_mean(&self, mean: &Vector2<f64>) -> Vector2<f64> {
        self.gain * mean + self.displacement_offset
    }

    pub fn apply_cov(&self, cov: &Matrix2<f64>) -> Matrix2<f64> {
        self.gain * cov * self.gain.transpose() + self.noise
    }

    /// `next` applied after `self`.
    pub fn then(&self, next: &GaussianChannel) -> GaussianChannel {
        GaussianChannel::from_parts(
            next.gain * self.gain,
            next.gain * self.noise * next.gain.transpose() + next.noise,
            next.gain * self.displacement_offset + next.displacement_offset,
        )
    }

    /// Largest elementwise deviation in gain and in noise.
    pub fn max_abs_diff(&self, other: &GaussianChannel) -> ChannelDeviation {
        ChannelDeviation {
            gain: (self.gain - other.gain).amax(),
            noise: (self.noise - other.noise).amax(),
            offset: (self.displacement_offset - other.displacement_offset).amax(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDeviation {
    pub gain: f64,
    pub noise: f64,
    pub offset: f64,
}

impl ChannelDeviation {
    /// Gain and noise only; offsets carry the public displacement bookkeeping.
    pub fn norm(&self) -> f64 {
        self.gain.max(self.noise)
    }
}

/// `last o middle o first`.
pub fn compose(first: &GaussianChannel, middle: &GaussianChannel, last: &GaussianChannel) -> GaussianChannel {
    first.then(middle).then(last)
}
