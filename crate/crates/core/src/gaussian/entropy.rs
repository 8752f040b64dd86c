use super::{CovarianceMatrix, PHYSICAL_TOL};
use crate::error::{Error, Result};

/// Information unit. All library functions return bits; convert at the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Bits => bits,
            LogBase::Nats => bits * std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Bits => "2",
            LogBase::Nats => "e",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "2" | "bits" => Some(LogBase::Bits),
            "e" | "nats" => Some(LogBase::Nats),
            _ => None,
        }
    }
}

const GUARD: f64 = 1e-12;

/// Entropy of a single-mode thermal state with symplectic eigenvalue `nu`, in bits.
pub fn g_entropy(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - PHYSICAL_TOL) {
        return Err(Error::Unphysical(nu));
    }
    if nu <= 1.0 + GUARD {
        return Ok(0.0);
    }
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    if nu < 3.0 {
        return Ok(plus * plus.log2() - minus * minus.log2());
    }
    // plus log(1 + 1/minus) + log(minus): no cancellation between large terms.
    Ok(plus * (1.0 / minus).ln_1p() / std::f64::consts::LN_2 + minus.log2())
}

pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    cm.spectrum()?.entropy()
}

/// Log-negativity of the two-mode squeezed vacuum of local variance `v`, in bits.
pub fn log_negativity_epr(v: f64) -> Result<f64> {
    if !(v >= 1.0) {
        return Err(Error::InvalidParameter(format!("EPR variance must be >= 1, got {v}")));
    }
    // 2V^2 - 1 - 2V sqrt(V^2-1) = (V - sqrt(V^2-1))^2, which avoids cancellation.
    let nu_minus = 1.0 / (v + (v * v - 1.0).sqrt());
    Ok((-nu_minus.log2()).max(0.0))
}
