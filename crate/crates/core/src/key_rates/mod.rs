//! Secret-key rates for the eight protocol variants.
//!
//! Two independent routes are provided: closed-form asymptotic rates
//! ([`asymptotic`]) and an exact finite-modulation engine ([`exact`]) that
//! rebuilds every covariance matrix from the physical network. Both are
//! reachable through the name-keyed [`ProtocolRegistry`].

pub mod asymptotic;
mod coefficients;
pub mod exact;
mod het2;
mod network;
mod protocols;
mod registry;
pub mod spectra;

use std::fmt;
use std::str::FromStr;

pub use asymptotic::*;
pub use coefficients::{OneWayCoefficients, TwoWayCoefficients};
pub use exact::{exact_rate, exact_rate_with, RrConditioning};
pub use het2::{het2_rr_eigenvalues, n_product_closed_form};
pub use network::{Observable, PhaseSpaceModel};
pub use registry::{KeyRateProtocol, ProtocolRegistry, Support};

use crate::attacks::AttackParams;
use crate::error::Error;
use crate::gaussian::LogBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Hom,
    Het,
    CollHom,
    CollHet,
    Hom2,
    Het2,
    CollHom2,
    CollHet2,
}

impl Protocol {
    pub const ALL: [Protocol; 8] = [
        Protocol::Hom,
        Protocol::Het,
        Protocol::CollHom,
        Protocol::CollHet,
        Protocol::Hom2,
        Protocol::Het2,
        Protocol::CollHom2,
        Protocol::CollHet2,
    ];

    /// Registry / CLI name.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Hom => "hom",
            Protocol::Het => "het",
            Protocol::CollHom => "coll_hom",
            Protocol::CollHet => "coll_het",
            Protocol::Hom2 => "hom2",
            Protocol::Het2 => "het2",
            Protocol::CollHom2 => "coll_hom2",
            Protocol::CollHet2 => "coll_het2",
        }
    }

    pub fn is_two_way(self) -> bool {
        matches!(self, Protocol::Hom2 | Protocol::Het2 | Protocol::CollHom2 | Protocol::CollHet2)
    }

    pub fn is_collective(self) -> bool {
        matches!(self, Protocol::CollHom | Protocol::CollHet | Protocol::CollHom2 | Protocol::CollHet2)
    }

    /// Joint decoding of both quadratures (heterodyne-type) versus a single quadrature.
    pub fn is_joint(self) -> bool {
        matches!(self, Protocol::Het | Protocol::CollHet | Protocol::Het2 | Protocol::CollHet2)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Protocol::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reconciliation {
    /// Bob estimates Alice's variable.
    Direct,
    /// Alice estimates Bob's variable.
    Reverse,
}

impl Reconciliation {
    pub fn name(self) -> &'static str {
        match self {
            Reconciliation::Direct => "dr",
            Reconciliation::Reverse => "rr",
        }
    }
}

impl fmt::Display for Reconciliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reconciliation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dr" | "direct" => Ok(Reconciliation::Direct),
            "rr" | "reverse" => Ok(Reconciliation::Reverse),
            _ => Err(Error::Parse(format!("unknown reconciliation `{s}` (expected dr or rr)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Asymptotic,
    ExactFiniteV,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Asymptotic => "asymptotic",
            Method::ExactFiniteV => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A key rate in bits per protocol run, or the divergent `-inf` case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    NegInfinity,
}

impl Rate {
    pub fn finite(self) -> Option<f64> {
        match self {
            Rate::Finite(x) => Some(x),
            Rate::NegInfinity => None,
        }
    }

    /// `-inf` maps to `f64::NEG_INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn in_base(self, base: LogBase) -> Rate {
        match self {
            Rate::Finite(x) => Rate::Finite(base.from_bits(x)),
            Rate::NegInfinity => Rate::NegInfinity,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Rate::Finite(x) if x > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub protocol: Protocol,
    pub reconciliation: Reconciliation,
    pub rate: Rate,
    pub method: Method,
    pub params: AttackParams,
    /// Modulation variance, for the finite-`V` methods.
    pub modulation: Option<f64>,
}

impl RateResult {
    pub fn bits(&self) -> f64 {
        self.rate.as_f64()
    }
}
