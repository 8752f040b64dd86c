use std::collections::BTreeMap;
use std::sync::Arc;

use super::exact::{exact_rate_with, ExactOptions};
use super::protocols;
use super::{Method, Protocol, Rate, RateResult, Reconciliation};
use crate::attacks::AttackParams;
use crate::error::{Error, Result};

/// Whether a reconciliation direction has a finite closed-form rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    ClosedForm,
    /// The rate is `-inf`; the string explains why.
    Diverges(&'static str),
}

pub const DIVERGENT_RR: &str = "the Holevo bound I(B:E) is too large; the reverse-reconciliation rate diverges to -inf";

/// One protocol variant: its closed-form rates and exact engine.
pub trait KeyRateProtocol: Send + Sync {
    fn protocol(&self) -> Protocol;

    fn support(&self, recon: Reconciliation) -> Support;

    /// Closed-form rate for a supported direction.
    fn closed_form(&self, recon: Reconciliation, params: &AttackParams) -> Result<RateResult>;

    fn name(&self) -> &'static str {
        self.protocol().name()
    }

    /// Large-modulation rate; the `-inf` sentinel for divergent directions.
    fn asymptotic(&self, recon: Reconciliation, params: &AttackParams) -> Result<RateResult> {
        match self.support(recon) {
            Support::ClosedForm => self.closed_form(recon, params),
            Support::Diverges(_) => {
                params.require_open()?;
                Ok(RateResult {
                    protocol: self.protocol(),
                    reconciliation: recon,
                    rate: Rate::NegInfinity,
                    method: Method::Asymptotic,
                    params: *params,
                    modulation: None,
                })
            }
        }
    }

    fn exact(
        &self,
        recon: Reconciliation,
        v: f64,
        params: &AttackParams,
        options: &ExactOptions,
    ) -> Result<RateResult> {
        exact_rate_with(self.protocol(), recon, v, params, options)
    }

    /// Like [`KeyRateProtocol::support`] but as an error carrying the reason.
    fn require_supported(&self, recon: Reconciliation) -> Result<()> {
        match self.support(recon) {
            Support::ClosedForm => Ok(()),
            Support::Diverges(reason) => Err(Error::Unsupported {
                protocol: self.name().to_string(),
                recon: recon.name().to_string(),
                reason: reason.to_string(),
            }),
        }
    }
}

/// Protocol strategies keyed by name.
#[derive(Clone)]
pub struct ProtocolRegistry {
    entries: BTreeMap<&'static str, Arc<dyn KeyRateProtocol>>,
}

impl ProtocolRegistry {
    pub fn empty() -> Self {
        ProtocolRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, strategy: Arc<dyn KeyRateProtocol>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn KeyRateProtocol> {
        self.entries.get(name).map(|s| s.as_ref()).ok_or_else(|| Error::UnknownProtocol(name.to_string()))
    }

    pub fn for_protocol(&self, protocol: Protocol) -> Result<&dyn KeyRateProtocol> {
        self.get(protocol.name())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for ProtocolRegistry {
    /// All eight variants.
    fn default() -> Self {
        let mut reg = ProtocolRegistry::empty();
        for s in protocols::all() {
            reg.register(s);
        }
        reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_every_protocol() {
        let reg = ProtocolRegistry::default();
        assert_eq!(reg.len(), 8);
        for p in Protocol::ALL {
            assert_eq!(reg.for_protocol(p).unwrap().protocol(), p);
        }
        assert!(matches!(reg.get("bogus"), Err(Error::UnknownProtocol(_))));
    }

    #[test]
    fn divergent_rr_gives_sentinel_and_reason() {
        let reg = ProtocolRegistry::default();
        let p = AttackParams::new(0.5, 1.0).unwrap();
        for name in ["coll_hom", "coll_hom2", "coll_het2"] {
            let s = reg.get(name).unwrap();
            assert_eq!(s.asymptotic(Reconciliation::Reverse, &p).unwrap().rate, Rate::NegInfinity);
            assert!(matches!(s.require_supported(Reconciliation::Reverse), Err(Error::Unsupported { .. })));
        }
        assert!(reg.get("coll_het").unwrap().require_supported(Reconciliation::Reverse).is_ok());
    }
}
