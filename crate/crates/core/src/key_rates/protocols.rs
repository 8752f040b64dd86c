//! One strategy per protocol variant.

use std::sync::Arc;

use super::asymptotic as cf;
use super::registry::{KeyRateProtocol, Support, DIVERGENT_RR};
use super::{Protocol, RateResult, Reconciliation};
use crate::attacks::AttackParams;
use crate::error::Result;

macro_rules! strategy {
    ($ty:ident, $proto:expr, dr: $dr:path, rr: $rr:path) => {
        pub struct $ty;

        impl KeyRateProtocol for $ty {
            fn protocol(&self) -> Protocol {
                $proto
            }

            fn support(&self, _recon: Reconciliation) -> Support {
                Support::ClosedForm
            }

            fn closed_form(&self, recon: Reconciliation, params: &AttackParams) -> Result<RateResult> {
                match recon {
                    Reconciliation::Direct => $dr(params),
                    Reconciliation::Reverse => $rr(params),
                }
            }
        }
    };
    ($ty:ident, $proto:expr, dr: $dr:path) => {
        pub struct $ty;

        impl KeyRateProtocol for $ty {
            fn protocol(&self) -> Protocol {
                $proto
            }

            fn support(&self, recon: Reconciliation) -> Support {
                match recon {
                    Reconciliation::Direct => Support::ClosedForm,
                    Reconciliation::Reverse => Support::Diverges(DIVERGENT_RR),
                }
            }

            fn closed_form(&self, recon: Reconciliation, params: &AttackParams) -> Result<RateResult> {
                debug_assert_eq!(recon, Reconciliation::Direct);
                $dr(params)
            }
        }
    };
}

strategy!(Hom, Protocol::Hom, dr: cf::rate_dr_hom, rr: cf::rate_rr_hom);
strategy!(Het, Protocol::Het, dr: cf::rate_dr_het, rr: cf::rate_rr_het);
strategy!(CollHom, Protocol::CollHom, dr: cf::rate_dr_coll_hom);
strategy!(CollHet, Protocol::CollHet, dr: cf::rate_dr_coll_het, rr: cf::rate_rr_coll_het);
strategy!(Hom2, Protocol::Hom2, dr: cf::rate_dr_hom2, rr: cf::rate_rr_hom2);
strategy!(Het2, Protocol::Het2, dr: cf::rate_dr_het2, rr: cf::rate_rr_het2);
strategy!(CollHom2, Protocol::CollHom2, dr: cf::rate_dr_coll_hom2);
strategy!(CollHet2, Protocol::CollHet2, dr: cf::rate_dr_coll_het2);

pub(super) fn all() -> Vec<Arc<dyn KeyRateProtocol>> {
    vec![
        Arc::new(Hom),
        Arc::new(Het),
        Arc::new(CollHom),
        Arc::new(CollHet),
        Arc::new(Hom2),
        Arc::new(Het2),
        Arc::new(CollHom2),
        Arc::new(CollHet2),
    ]
}
