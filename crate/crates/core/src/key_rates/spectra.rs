//! Large-modulation symplectic spectra of every output CM, used as a test oracle
//! for the exact engine.
//!
//! Some eigenvalues are known only through their product; these appear as
//! [`SpectrumEntry::Group`].

use super::exact::{build_network, ExactOptions};
use super::{n_product_closed_form, Protocol};
use crate::attacks::AttackParams;
use crate::error::{Error, Result};
use crate::gaussian::SymplecticSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Bob,
    Eve,
    /// Joint Bob and Eve state (one-way only).
    BobEve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    None,
    /// On Alice's `Q_A`.
    AliceQ,
    /// On Alice's `(Q_A, P_A)`.
    AliceQP,
    /// On Bob's classical outcome `X_B` (individual protocols, Eve only).
    BobOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumEntry {
    Value(f64),
    /// `count` eigenvalues whose product is `product`.
    Group {
        count: usize,
        product: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSpectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl AsymptoticSpectrum {
    fn values(vals: &[f64]) -> Self {
        AsymptoticSpectrum { entries: vals.iter().map(|&v| SpectrumEntry::Value(v)).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries
            .iter()
            .map(|e| match e {
                SpectrumEntry::Value(_) => 1,
                SpectrumEntry::Group { count, .. } => *count,
            })
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest relative error of `numeric` against this spectrum.
    ///
    /// Each explicit value claims the closest unclaimed eigenvalue; the leftovers
    /// are compared against the group product.
    pub fn max_relative_error(&self, numeric: &SymplecticSpectrum) -> Result<f64> {
        if numeric.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: numeric.len() });
        }
        let mut free: Vec<f64> = numeric.values().to_vec();
        let mut worst: f64 = 0.0;
        let mut groups = Vec::new();
        for entry in &self.entries {
            match *entry {
                SpectrumEntry::Value(x) => {
                    let (idx, err) = free
                        .iter()
                        .enumerate()
                        .map(|(i, &y)| (i, ((y - x) / x).abs()))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("length checked");
                    free.remove(idx);
                    worst = worst.max(err);
                }
                SpectrumEntry::Group { count, product } => groups.push((count, product)),
            }
        }
        // At most one group per spectrum in every list below.
        if let Some(&(_, product)) = groups.first() {
            let got: f64 = free.iter().product();
            worst = worst.max(((got - product) / product).abs());
        }
        Ok(worst)
    }
}

/// The large-`V` spectrum of `party` conditioned as requested, evaluated at `v`.
pub fn asymptotic_spectra(
    protocol: Protocol,
    party: Party,
    conditioning: Conditioning,
    params: &AttackParams,
    v: f64,
) -> Result<AsymptoticSpectrum> {
    params.require_open()?;
    let (t, w) = (params.t, params.w);
    let b1 = (1.0 - t) * w + t;
    let e1 = (1.0 - t) + t * w;
    let unknown =
        || Error::InvalidParameter(format!("no asymptotic spectrum for {protocol} {party:?} {conditioning:?}"));
    use Conditioning as C;
    use Party as P;
    let spec = if !protocol.is_two_way() {
        match (party, conditioning) {
            (P::Bob, C::None) => AsymptoticSpectrum::values(&[t * v]),
            (P::Bob, C::AliceQ) => AsymptoticSpectrum::values(&[(b1 * t * v).sqrt()]),
            (P::Bob, C::AliceQP) => AsymptoticSpectrum::values(&[b1]),
            (P::Eve, C::None) => AsymptoticSpectrum::values(&[(1.0 - t) * v, w]),
            (P::Eve, C::AliceQ) => AsymptoticSpectrum::values(&[(e1 * (1.0 - t) * v).sqrt(), (w * b1 / e1).sqrt()]),
            (P::Eve, C::AliceQP) => AsymptoticSpectrum::values(&[b1, 1.0]),
            (P::BobEve, C::None) => AsymptoticSpectrum::values(&[v, 1.0, 1.0]),
            (P::Eve, C::BobOutcome) => match protocol {
                Protocol::Hom => AsymptoticSpectrum::values(&[(v * w * (1.0 - t) / t).sqrt(), 1.0]),
                Protocol::Het => AsymptoticSpectrum::values(&[(1.0 - t + b1) / t, 1.0]),
                _ => return Err(unknown()),
            },
            _ => return Err(unknown()),
        }
    } else {
        let varsigma = (1.0 + t * t * (t * t + t - 2.0)).sqrt();
        let upsilon = (1.0 + 3.0 * t + t * t).sqrt();
        let group = |count, product| SpectrumEntry::Group { count, product };
        match (party, conditioning) {
            (P::Bob, C::None) => AsymptoticSpectrum { entries: vec![group(2, t * v * v)] },
            (P::Bob, C::AliceQ) => {
                AsymptoticSpectrum::values(&[varsigma * v, (t * (1.0 - t * t) * w * v).sqrt() / varsigma])
            }
            (P::Bob, C::AliceQP) => AsymptoticSpectrum::values(&[(1.0 - t * t) * v, w]),
            (P::Eve, C::None) => AsymptoticSpectrum {
                entries: vec![group(2, (1.0 - t).powi(2) * v * v), SpectrumEntry::Value(w), SpectrumEntry::Value(w)],
            },
            (P::Eve, C::AliceQ) => {
                AsymptoticSpectrum::values(&[upsilon * (1.0 - t) * v, ((1.0 - t * t) * w * v).sqrt() / upsilon, w, 1.0])
            }
            (P::Eve, C::AliceQP) => AsymptoticSpectrum::values(&[(1.0 - t * t) * v, w, 1.0, 1.0]),
            (P::Eve, C::BobOutcome) => match protocol {
                Protocol::Hom2 => {
                    let m = ((1.0 - t).powi(3) * (1.0 + t.powi(3)) * w / t).sqrt();
                    AsymptoticSpectrum {
                        entries: vec![group(2, m * v.powf(1.5)), SpectrumEntry::Value(w), SpectrumEntry::Value(1.0)],
                    }
                }
                Protocol::Het2 => AsymptoticSpectrum {
                    entries: vec![SpectrumEntry::Value((1.0 - t * t) * v), group(3, n_product_closed_form(params))],
                },
                _ => return Err(unknown()),
            },
            _ => return Err(unknown()),
        }
    };
    Ok(spec)
}

/// Numeric spectrum of the same CM from the exact network at modulation `v`.
pub fn exact_spectra(
    protocol: Protocol,
    party: Party,
    conditioning: Conditioning,
    params: &AttackParams,
    v: f64,
) -> Result<SymplecticSpectrum> {
    let net = build_network(protocol, v, params, &ExactOptions::default())?;
    let modes = match party {
        Party::Bob => net.bob_modes.clone(),
        Party::Eve => net.eve_modes.clone(),
        Party::BobEve => net.bob_modes.iter().chain(&net.eve_modes).copied().collect(),
    };
    let on = match conditioning {
        Conditioning::None => Vec::new(),
        Conditioning::AliceQ => vec![net.model.classical(0)],
        Conditioning::AliceQP => vec![net.model.classical(0), net.model.classical(1)],
        Conditioning::BobOutcome => {
            if net.bob_outcome.is_empty() {
                return Err(Error::InvalidParameter(format!("{protocol} has no classical outcome")));
            }
            net.bob_outcome.clone()
        }
    };
    net.model.conditional_spectrum(&modes, &on)
}

/// Every (protocol, party, conditioning) combination with a published limit.
pub fn oracle_cases() -> Vec<(Protocol, Party, Conditioning)> {
    use Conditioning as C;
    use Party as P;
    let mut cases = Vec::new();
    for (proto, parties) in [(Protocol::Hom, &[P::Bob, P::Eve][..]), (Protocol::Hom2, &[P::Bob, P::Eve][..])] {
        for &party in parties {
            for cond in [C::None, C::AliceQ, C::AliceQP] {
                cases.push((proto, party, cond));
            }
        }
    }
    cases.push((Protocol::Hom, P::BobEve, C::None));
    for proto in [Protocol::Hom, Protocol::Het, Protocol::Hom2, Protocol::Het2] {
        cases.push((proto, P::Eve, C::BobOutcome));
    }
    cases
}
