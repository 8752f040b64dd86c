use std::fmt::Write as _;

use nalgebra::{Matrix2, Vector2};

use super::dataset::{default_probe_inputs, TomographyDataset};
use super::estimate::{estimate_channel, ChannelEstimate};
use super::{compose, ChannelDeviation, GaussianChannel};
use crate::attacks::{correlated_two_mode_channels, CorrelatedAttackParams};
use crate::error::{Error, Result};
use crate::output::fmt_num;

/// Threshold on max-abs channel deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Absolute bound, for channels known without sampling error.
    Fixed(f64),
    /// Multiple of the largest standard error of the compared entries.
    Sigmas(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Sigmas(5.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Reducible,
    Irreducible(f64),
    Asymmetric(f64),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Reducible => "Reducible",
            Verdict::Irreducible(_) => "Irreducible",
            Verdict::Asymmetric(_) => "Asymmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducibilityReport {
    pub verdict: Verdict,
    /// `E1` against `E2`.
    pub asymmetry: ChannelDeviation,
    /// Measured round trip against `compose(E1, alice, E2)`.
    pub reducibility: ChannelDeviation,
    pub tol_asymmetry: f64,
    pub tol_reducibility: f64,
}

impl ReducibilityReport {
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("verdict", self.verdict.name().to_string());
        kv("asymmetry_deviation", fmt_num(self.asymmetry.norm()));
        kv("asymmetry_gain", fmt_num(self.asymmetry.gain));
        kv("asymmetry_noise", fmt_num(self.asymmetry.noise));
        kv("asymmetry_tol", fmt_num(self.tol_asymmetry));
        kv("reducibility_deviation", fmt_num(self.reducibility.norm()));
        kv("reducibility_gain", fmt_num(self.reducibility.gain));
        kv("reducibility_noise", fmt_num(self.reducibility.noise));
        kv("reducibility_tol", fmt_num(self.tol_reducibility));
        out
    }
}

/// Gain entries then the three independent noise entries.
fn flatten(ch: &GaussianChannel) -> [f64; 7] {
    let (g, n) = (&ch.gain, &ch.noise);
    [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)], n[(0, 0)], n[(0, 1)], n[(1, 1)]]
}

fn flatten_se(e: &ChannelEstimate) -> [f64; 7] {
    let (g, n) = (&e.gain_se, &e.noise_se);
    [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)], n[(0, 0)], n[(0, 1)], n[(1, 1)]]
}

fn unflatten(x: &[f64; 7], offset: Vector2<f64>) -> GaussianChannel {
    GaussianChannel::from_parts(Matrix2::new(x[0], x[1], x[2], x[3]), Matrix2::new(x[4], x[5], x[5], x[6]), offset)
}

/// Standard errors of `compose(e1, alice, e2)` by first-order propagation with a
/// central-difference Jacobian.
fn composed_se(e1: &ChannelEstimate, alice: &GaussianChannel, e2: &ChannelEstimate) -> [f64; 7] {
    let (x1, x2) = (flatten(&e1.channel), flatten(&e2.channel));
    let (s1, s2) = (flatten_se(e1), flatten_se(e2));
    let eval = |a: &[f64; 7], b: &[f64; 7]| {
        flatten(&compose(
            &unflatten(a, e1.channel.displacement_offset),
            alice,
            &unflatten(b, e2.channel.displacement_offset),
        ))
    };
    let mut var = [0.0; 7];
    for side in 0..2 {
        for i in 0..7 {
            let se = if side == 0 { s1[i] } else { s2[i] };
            if se == 0.0 {
                continue;
            }
            let h = 1e-6 * (1.0 + if side == 0 { x1[i] } else { x2[i] }.abs());
            let (mut a_plus, mut a_minus, mut b_plus, mut b_minus) = (x1, x1, x2, x2);
            if side == 0 {
                a_plus[i] += h;
                a_minus[i] -= h;
            } else {
                b_plus[i] += h;
                b_minus[i] -= h;
            }
            let (up, down) = (eval(&a_plus, &b_plus), eval(&a_minus, &b_minus));
            for (k, v) in var.iter_mut().enumerate() {
                *v += ((up[k] - down[k]) / (2.0 * h) * se).powi(2);
            }
        }
    }
    var.map(f64::sqrt)
}

fn resolve(tol: Tolerance, a: &[f64; 7], b: &[f64; 7], what: &str) -> Result<f64> {
    let value = match tol {
        Tolerance::Fixed(x) => x,
        Tolerance::Sigmas(k) => {
            if !(k > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {k} sigma")));
            }
            k * a.iter().zip(b).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max)
        }
    };
    if !(value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} tolerance must be positive, got {value}; use a fixed tolerance for exact channels"
        )));
    }
    Ok(value)
}

/// Asymmetric if `E1` and `E2` differ by more than the tolerance, otherwise
/// Irreducible if the round trip differs from `compose(E1, alice, E2)`,
/// otherwise Reducible. Offsets are ignored.
pub fn check_reducibility(
    e1: &ChannelEstimate,
    e2: &ChannelEstimate,
    round_trip: &ChannelEstimate,
    alice: &GaussianChannel,
    tol: Tolerance,
) -> Result<ReducibilityReport> {
    let asymmetry = e1.channel.max_abs_diff(&e2.channel);
    let tol_asymmetry = resolve(tol, &flatten_se(e1), &flatten_se(e2), "asymmetry")?;
    let predicted = compose(&e1.channel, alice, &e2.channel);
    let reducibility = round_trip.channel.max_abs_diff(&predicted);
    let tol_reducibility = resolve(tol, &composed_se(e1, alice, e2), &flatten_se(round_trip), "reducibility")?;

    let verdict = if asymmetry.norm() > tol_asymmetry {
        Verdict::Asymmetric(asymmetry.norm())
    } else if reducibility.norm() > tol_reducibility {
        Verdict::Irreducible(reducibility.norm())
    } else {
        Verdict::Reducible
    };
    Ok(ReducibilityReport { verdict, asymmetry, reducibility, tol_asymmetry, tol_reducibility })
}

/// Datasets an honest pair would collect in the hybrid protocol: OFF rounds
/// probe each path alone, ON rounds probe the round trip with encoding off.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridDatasets {
    pub forward: TomographyDataset,
    pub backward: TomographyDataset,
    pub round_trip: TomographyDataset,
}

impl HybridDatasets {
    /// Synthetic data from a correlated two-path attack. The three datasets use
    /// seeds `seed`, `seed + 1`, `seed + 2`.
    pub fn synthetic(attack: &CorrelatedAttackParams, inputs: &[Vector2<f64>], n: usize, seed: u64) -> Result<Self> {
        let ch = correlated_two_mode_channels(attack)?;
        Ok(Self {
            forward: TomographyDataset::synthetic(&ch.forward, inputs, n, seed)?,
            backward: TomographyDataset::synthetic(&ch.backward, inputs, n, seed.wrapping_add(1))?,
            round_trip: TomographyDataset::synthetic(&ch.round_trip, inputs, n, seed.wrapping_add(2))?,
        })
    }

    pub fn synthetic_default(attack: &CorrelatedAttackParams, n: usize, seed: u64) -> Result<Self> {
        Self::synthetic(attack, &default_probe_inputs(), n, seed)
    }

    /// Estimates all three channels and runs the test with Alice's map the identity.
    pub fn check(&self, tol: Tolerance) -> Result<ReducibilityReport> {
        let e1 = estimate_channel(&self.forward)?;
        let e2 = estimate_channel(&self.backward)?;
        let rt = estimate_channel(&self.round_trip)?;
        check_reducibility(&e1, &e2, &rt, &GaussianChannel::identity(), tol)
    }
}
