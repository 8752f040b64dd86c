//! One-mode Gaussian attacks (entangling cloner) and a correlated two-path family.

use nalgebra::{DMatrix, Matrix2, SMatrix, Vector2};

use crate::error::{Error, Result};
use crate::gaussian::{beam_splitter, epr_cm, symplectic_spectrum_of, CovarianceMatrix, SymplecticTransform};
use crate::tomography::GaussianChannel;

/// Entangling-cloner parameters: beam-splitter transmission `t` and Eve's EPR variance `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParams {
    pub t: f64,
    pub w: f64,
}

impl AttackParams {
    /// Accepts `t` in `[0, 1]` and `w >= 1`. Rate computations additionally
    /// require `0 < t < 1`, see [`AttackParams::require_open`].
    pub fn new(t: f64, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("T must lie in [0, 1], got {t}")));
        }
        if !(w >= 1.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!("W must be >= 1, got {w}")));
        }
        Ok(Self { t, w })
    }

    pub fn from_excess_noise(t: f64, n: f64) -> Result<Self> {
        Self::new(t, w_from_excess(t, n)?)
    }

    pub fn excess_noise(&self) -> f64 {
        excess_noise(self)
    }

    /// Rejects the endpoints `T = 0` and `T = 1`, where the asymptotic rates are undefined.
    pub fn require_open(&self) -> Result<()> {
        if self.t <= 0.0 || self.t >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "T must lie strictly inside (0, 1) for rate evaluation, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// Thermal photon number of the environment seen by Alice and Bob.
    pub fn thermal_photons(&self) -> f64 {
        0.5 * (self.w - 1.0)
    }
}

/// `N = (W - 1)(1 - T)/T`.
pub fn excess_noise(params: &AttackParams) -> f64 {
    (params.w - 1.0) * (1.0 - params.t) / params.t
}

/// Inverse of [`excess_noise`]: `W = 1 + N T/(1 - T)`.
pub fn w_from_excess(t: f64, n: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("T must lie in (0, 1), got {t}")));
    }
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!("excess noise must be >= 0, got {n}")));
    }
    Ok(1.0 + n * t / (1.0 - t))
}

/// Cloner acting on `(signal, E, E'')`: a beam splitter of transmission `T` on the
/// signal and `E`; `E''` is a spectator. The ancilla pair starts in `epr_cm(W)`,
/// see [`cloner_ancilla`].
pub fn cloner_transform(params: &AttackParams) -> Result<SymplecticTransform> {
    beam_splitter(params.t)?.embed(3, &[0, 1])
}

pub fn cloner_ancilla(params: &AttackParams) -> Result<CovarianceMatrix> {
    epr_cm(params.w)
}

/// Joint output CM of `(B, E', E'')` for a one-mode input `input`.
pub fn cloner_output(params: &AttackParams, input: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if input.n_modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: input.n_modes() });
    }
    let joint = input.direct_sum(&cloner_ancilla(params)?);
    crate::gaussian::apply_transform(&joint, &cloner_transform(params)?)
}

/// Two cloners (forward and backward path) whose injected ancilla modes are
/// correlated: `cov(E1, E2) = c k_max Z` with `k_max = sqrt((W_min - 1)(W_max + 1))`,
/// the largest cross-correlation compatible with thermal marginals `W_f`, `W_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedAttackParams {
    pub forward: AttackParams,
    pub backward: AttackParams,
    pub correlation: f64,
}

impl CorrelatedAttackParams {
    pub fn symmetric(params: AttackParams, correlation: f64) -> Self {
        Self { forward: params, backward: params, correlation }
    }

    pub fn max_cross(&self) -> f64 {
        let (lo, hi) = if self.forward.w <= self.backward.w {
            (self.forward.w, self.backward.w)
        } else {
            (self.backward.w, self.forward.w)
        };
        ((lo - 1.0) * (hi + 1.0)).sqrt()
    }

    pub fn cross(&self) -> f64 {
        self.correlation * self.max_cross()
    }

    /// CM of the two injected ancilla modes `(E1, E2)`.
    pub fn ancilla_cm(&self) -> Result<CovarianceMatrix> {
        if !(-1.0..=1.0).contains(&self.correlation) {
            return Err(Error::InvalidParameter(format!("correlation must lie in [-1, 1], got {}", self.correlation)));
        }
        let (wf, wb, k) = (self.forward.w, self.backward.w, self.cross());
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            wf,  0.0, k,   0.0,
            0.0, wf,  0.0, -k,
            k,   0.0, wb,  0.0,
            0.0, -k,  0.0, wb,
        ]);
        let spectrum = symplectic_spectrum_of(&m)?;
        if spectrum.min() < 1.0 - crate::gaussian::PHYSICAL_TOL {
            return Err(Error::Unphysical(spectrum.min()));
        }
        CovarianceMatrix::from_symmetric(m)
    }
}

/// Channels seen by the honest parties under a correlated two-path attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPathChannels {
    pub forward: GaussianChannel,
    pub backward: GaussianChannel,
    /// Round trip with Alice's encoding switched off (zero displacement).
    pub round_trip: GaussianChannel,
}

impl TwoPathChannels {
    /// Round trip with Alice displacing the mode by `alpha = (q, p)` between the paths.
    pub fn round_trip_with_encoding(&self, q: f64, p: f64) -> GaussianChannel {
        let mut ch = self.round_trip;
        ch.displacement_offset += self.backward.gain * Vector2::new(q, p);
        ch
    }
}

pub fn correlated_two_mode_channels(params: &CorrelatedAttackParams) -> Result<TwoPathChannels> {
    let (f, b) = (params.forward, params.backward);
    f.require_open()?;
    b.require_open()?;
    let ancilla = params.ancilla_cm()?;
    let forward = GaussianChannel::lossy_thermal(f.t, f.w);
    let backward = GaussianChannel::lossy_thermal(b.t, b.w);

    // out = sqrt(T_b) [sqrt(T_f) in + sqrt(1-T_f) E1] + sqrt(1-T_b) E2
    let mut mix = SMatrix::<f64, 2, 4>::zeros();
    let (a1, a2) = ((b.t * (1.0 - f.t)).sqrt(), (1.0 - b.t).sqrt());
    for q in 0..2 {
        mix[(q, q)] = a1;
        mix[(q, 2 + q)] = a2;
    }
    let sigma = SMatrix::<f64, 4, 4>::from_fn(|i, j| ancilla.matrix()[(i, j)]);
    let noise: Matrix2<f64> = mix * sigma * mix.transpose();
    let round_trip = GaussianChannel::new(Matrix2::identity() * (f.t * b.t).sqrt(), noise, Vector2::zeros())?;
    Ok(TwoPathChannels { forward, backward, round_trip })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_eigenvalues, vacuum_cm};
    use crate::tomography::compose;
    use proptest::prelude::*;

    #[test]
    fn excess_noise_values() {
        assert_eq!(excess_noise(&AttackParams::new(0.5, 1.0).unwrap()), 0.0);
        assert!((excess_noise(&AttackParams::new(0.5, 2.0).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(excess_noise(&AttackParams::new(1.0, 7.0).unwrap()), 0.0);
    }

    #[test]
    fn w_from_excess_values() {
        assert_eq!(w_from_excess(0.3, 0.0).unwrap(), 1.0);
        assert!((w_from_excess(0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(w_from_excess(0.0, 1.0).is_err());
        assert!(w_from_excess(1.0, 1.0).is_err());
        assert!(w_from_excess(0.5, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn excess_round_trip(t in 0.01f64..0.99, n in 0.0f64..50.0) {
            let p = AttackParams::from_excess_noise(t, n).unwrap();
            prop_assert!((p.excess_noise() - n).abs() <= 1e-12 * n.max(1.0));
        }
    }

    #[test]
    fn params_validation() {
        assert!(AttackParams::new(1.2, 1.0).is_err());
        assert!(AttackParams::new(0.5, 0.9).is_err());
        let edge = AttackParams::new(1.0, 1.0).unwrap();
        assert!(edge.require_open().is_err());
    }

    #[test]
    fn lossless_cloner_is_transparent() {
        let p = AttackParams::new(1.0, 1.0).unwrap();
        let input = crate::gaussian::thermal_cm(5.0).unwrap();
        let out = cloner_output(&p, &input).unwrap();
        assert!((out.reduced(&[0]).unwrap().matrix() - input.matrix()).amax() < 1e-15);
    }

    #[test]
    fn cloner_reproduces_output_variances() {
        // Modulated vacuum of total variance V is a thermal state V I.
        let (v, t, w) = (37.0, 0.7, 1.9);
        let p = AttackParams::new(t, w).unwrap();
        let out = cloner_output(&p, &crate::gaussian::thermal_cm(v).unwrap()).unwrap();
        let m = out.matrix();
        let (bv, ev) = ((1.0 - t) * w + t * v, (1.0 - t) * v + t * w);
        assert!((m[(0, 0)] - bv).abs() < 1e-10 && (m[(1, 1)] - bv).abs() < 1e-10);
        assert!((m[(2, 2)] - ev).abs() < 1e-10 && (m[(3, 3)] - ev).abs() < 1e-10);
        // Conditional on Alice's value the input is the vacuum.
        let cond = cloner_output(&p, &vacuum_cm(1)).unwrap();
        let m = cond.matrix();
        let (b1, e1) = ((1.0 - t) * w + t, (1.0 - t) + t * w);
        assert!((m[(0, 0)] - b1).abs() < 1e-10 && (m[(2, 2)] - e1).abs() < 1e-10);
        assert!(symplectic_eigenvalues(&cond).unwrap().is_pure(1e-9));
    }

    #[test]
    fn uncorrelated_paths_compose_exactly() {
        let p = CorrelatedAttackParams {
            forward: AttackParams::new(0.6, 1.4).unwrap(),
            backward: AttackParams::new(0.8, 2.2).unwrap(),
            correlation: 0.0,
        };
        let ch = correlated_two_mode_channels(&p).unwrap();
        let composed = compose(&ch.forward, &GaussianChannel::identity(), &ch.backward);
        assert!(composed.max_abs_diff(&ch.round_trip).norm() < 1e-10);
    }

    #[test]
    fn correlation_breaks_composition() {
        let base = AttackParams::new(0.7, 1.5).unwrap();
        let dev = |c: f64| {
            let ch = correlated_two_mode_channels(&CorrelatedAttackParams::symmetric(base, c)).unwrap();
            let composed = compose(&ch.forward, &GaussianChannel::identity(), &ch.backward);
            ch.round_trip.noise - composed.noise
        };
        let d = dev(0.9);
        assert!(d.amax() > 10.0 * 1e-10);
        // Expected Q-Q deviation 2 sqrt(T_b (1-T_f)(1-T_b)) c sqrt(W^2 - 1).
        let expected = 2.0 * (0.7f64 * 0.3 * 0.3).sqrt() * 0.9 * (1.5f64 * 1.5 - 1.0).sqrt();
        assert!((d[(0, 0)] - expected).abs() < 1e-12);
        assert!((d[(1, 1)] + expected).abs() < 1e-12);
        assert!((dev(-0.9) + d).amax() < 1e-12);
        let mut prev = 0.0;
        for k in 0..=10 {
            let cur = dev(0.1 * k as f64).amax();
            assert!(cur >= prev);
            prev = cur;
        }
    }

    #[test]
    fn unphysical_correlation_rejected() {
        let p = CorrelatedAttackParams {
            forward: AttackParams::new(0.7, 1.2).unwrap(),
            backward: AttackParams::new(0.7, 4.0).unwrap(),
            correlation: 1.0,
        };
        let spectrum = symplectic_eigenvalues(&p.ancilla_cm().unwrap()).unwrap();
        assert!((spectrum.min() - 1.0).abs() < 1e-9);
        let over = CorrelatedAttackParams { correlation: 1.0, ..p };
        let mut m = over.ancilla_cm().unwrap().into_matrix();
        for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
            m[(i, j)] *= 1.01;
        }
        assert!(CovarianceMatrix::new(m).is_err());
        let p = CorrelatedAttackParams::symmetric(AttackParams::new(0.7, 1.5).unwrap(), 1.5);
        assert!(correlated_two_mode_channels(&p).is_err());
    }
}
