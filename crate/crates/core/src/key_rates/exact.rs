//! Exact finite-modulation rates built from the full optical network.
//!
//! One-way: Alice displaces a vacuum signal by `(Q_A, P_A)` of variance `V - 1`;
//! Eve's cloner mixes it with one half of `epr_cm(W)`.
//!
//! Two-way: Bob keeps `B1` of `epr_cm(V)` and sends `C1` through a cloner; Alice
//! displaces the received mode by `(Q_A, P_A)` of variance `V_bar` (default `V - 1`)
//! and sends it back through a second, independent cloner to Bob's `B2`.

use nalgebra::DMatrix;

use super::network::{Observable, PhaseSpaceModel};
use super::{Method, Protocol, Rate, RateResult, Reconciliation};
use crate::attacks::AttackParams;
use crate::error::{Error, Result};
use crate::gaussian::{beam_splitter, epr_cm, vacuum_cm, Quadrature};

/// How Eve's state is conditioned on Bob's outcome in reverse reconciliation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RrConditioning {
    /// Schur complement of Eve's CM on Bob's outcome.
    #[default]
    General,
    /// Residuals of the fixed large-modulation linear estimators of Eve's quadratures.
    OptimalEstimators,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactOptions {
    pub conditioning: RrConditioning,
    /// Alice's modulation variance in the two-way protocols; `None` means `V - 1`.
    pub alice_variance: Option<f64>,
}

/// The output network of one protocol run with all observables needed for the rates.
#[derive(Debug, Clone)]
pub struct ProtocolNetwork {
    pub model: PhaseSpaceModel,
    pub bob_modes: Vec<usize>,
    pub eve_modes: Vec<usize>,
    /// Alice's secret variable `X_A`.
    pub alice: Vec<Observable>,
    /// Bob's classical outcome `X_B` (individual protocols only).
    pub bob_outcome: Vec<Observable>,
    /// Large-`V` linear estimators of Eve's quadratures from `X_B`, one column per outcome.
    pub estimators: Option<DMatrix<f64>>,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Heterodyne outcomes `2^-1/2 (Q_m + s_q Q_0, P_m + s_p P_0)` with vacuum mode `vac`.
fn heterodyne(model: &PhaseSpaceModel, mode: usize, vac: usize, s_q: f64, s_p: f64) -> (Observable, Observable) {
    let q =
        model.quadrature(mode, Quadrature::Q).plus(&model.quadrature(vac, Quadrature::Q).scaled(s_q)).scaled(SQRT_HALF);
    let p =
        model.quadrature(mode, Quadrature::P).plus(&model.quadrature(vac, Quadrature::P).scaled(s_p)).scaled(SQRT_HALF);
    (q, p)
}

fn alice_variable(model: &PhaseSpaceModel, joint: bool) -> Vec<Observable> {
    if joint {
        vec![model.classical(0), model.classical(1)]
    } else {
        vec![model.classical(0)]
    }
}

pub fn build_network(
    protocol: Protocol,
    v: f64,
    params: &AttackParams,
    options: &ExactOptions,
) -> Result<ProtocolNetwork> {
    params.require_open()?;
    build_network_closed(protocol, v, params, options)
}

/// Like [`build_network`] but also accepts `T = 0` and `T = 1`; the large-`V`
/// estimators are then omitted.
pub(crate) fn build_network_closed(
    protocol: Protocol,
    v: f64,
    params: &AttackParams,
    options: &ExactOptions,
) -> Result<ProtocolNetwork> {
    if !(v > 1.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("modulation V must exceed 1, got {v}")));
    }
    let mut net = if protocol.is_two_way() {
        two_way_network(protocol, v, params, options.alice_variance.unwrap_or(v - 1.0))?
    } else {
        one_way_network(protocol, v, params)
    };
    if params.t <= 0.0 || params.t >= 1.0 {
        net.estimators = None;
    }
    Ok(net)
}

fn one_way_network(protocol: Protocol, v: f64, params: &AttackParams) -> ProtocolNetwork {
    let t = params.t;
    let mut model = PhaseSpaceModel::with_classical(&[v - 1.0, v - 1.0]);
    let a = model.add_modes(&vacuum_cm(1));
    let e = model.add_modes(&epr_cm(params.w).expect("W validated"));
    let vac = model.add_modes(&vacuum_cm(1));
    model.displace(a, 0, 1).expect("indices in range");
    model.apply(&beam_splitter(t).expect("T validated"), &[a, e]).expect("modes in range");

    let alice = alice_variable(&model, protocol.is_joint());
    let (bob_outcome, estimators) = match protocol {
        Protocol::Hom => {
            let mut k = DMatrix::zeros(4, 1);
            k[(0, 0)] = -((1.0 - t) / t).sqrt();
            (vec![model.quadrature(a, Quadrature::Q)], Some(k))
        }
        Protocol::Het => {
            let (q, p) = heterodyne(&model, a, vac, 1.0, -1.0);
            let c = -(2.0 * (1.0 - t) / t).sqrt();
            let mut k = DMatrix::zeros(4, 2);
            k[(0, 0)] = c;
            k[(1, 1)] = c;
            (vec![q, p], Some(k))
        }
        _ => (Vec::new(), None),
    };
    ProtocolNetwork { model, bob_modes: vec![a], eve_modes: vec![e, e + 1], alice, bob_outcome, estimators }
}

fn two_way_network(protocol: Protocol, v: f64, params: &AttackParams, alice_var: f64) -> Result<ProtocolNetwork> {
    if !(alice_var >= 0.0) {
        return Err(Error::InvalidParameter(format!("Alice's modulation variance must be >= 0, got {alice_var}")));
    }
    let t = params.t;
    let mut model = PhaseSpaceModel::with_classical(&[alice_var, alice_var]);
    let b1 = model.add_modes(&epr_cm(v)?);
    let c = b1 + 1;
    let e1 = model.add_modes(&epr_cm(params.w)?);
    let e2 = model.add_modes(&epr_cm(params.w)?);
    let vac0 = model.add_modes(&vacuum_cm(1));
    let vac1 = model.add_modes(&vacuum_cm(1));
    let bs = beam_splitter(t)?;
    model.apply(&bs, &[c, e1])?;
    model.displace(c, 0, 1)?;
    model.apply(&bs, &[c, e2])?;

    let alice = alice_variable(&model, protocol.is_joint());
    let (bob_outcome, estimators) = match protocol {
        Protocol::Hom2 => {
            let qb = model.quadrature(c, Quadrature::Q).minus(&model.quadrature(b1, Quadrature::Q).scaled(t));
            let mut k = DMatrix::zeros(8, 1);
            k[(4, 0)] = -((1.0 - t) / t).sqrt();
            (vec![qb], Some(k))
        }
        Protocol::Het2 => {
            let (q_minus, p_plus) = heterodyne(&model, b1, vac0, -1.0, 1.0);
            let (big_q_minus, big_p_plus) = heterodyne(&model, c, vac1, -1.0, 1.0);
            let qb = big_q_minus.minus(&q_minus.scaled(t));
            let pb = big_p_plus.plus(&p_plus.scaled(t));
            let s = -(2.0 * (1.0 - t) / t).sqrt();
            let mut k = DMatrix::zeros(8, 2);
            k[(4, 0)] = s;
            k[(5, 1)] = s;
            (vec![qb, pb], Some(k))
        }
        _ => (Vec::new(), None),
    };
    Ok(ProtocolNetwork {
        model,
        bob_modes: vec![b1, c],
        eve_modes: vec![e1, e1 + 1, e2, e2 + 1],
        alice,
        bob_outcome,
        estimators,
    })
}

impl ProtocolNetwork {
    fn eve_observables(&self) -> Vec<Observable> {
        self.model.mode_observables(&self.eve_modes)
    }

    /// `I(X_A : X_B)` from total and conditional outcome covariances.
    pub fn shannon_information(&self) -> Result<f64> {
        if self.bob_outcome.is_empty() {
            return Err(Error::InvalidParameter("collective protocols have no classical outcome".into()));
        }
        let total = self.model.conditional(&self.bob_outcome, &[])?;
        let cond = self.model.conditional(&self.bob_outcome, &self.alice)?;
        Ok(0.5 * (total.determinant() / cond.determinant()).log2())
    }

    /// Holevo bound `I(X_A : K) = S(K) - S(K | X_A)` for the modes of party `K`.
    pub fn holevo_alice(&self, modes: &[usize]) -> Result<f64> {
        Ok(self.model.conditional_entropy(modes, &[])? - self.model.conditional_entropy(modes, &self.alice)?)
    }

    /// `I(X_B : E)` for individual protocols.
    pub fn holevo_bob_eve(&self, conditioning: RrConditioning) -> Result<f64> {
        let s_e = self.model.conditional_entropy(&self.eve_modes, &[])?;
        let cond = match conditioning {
            RrConditioning::General => self.model.conditional(&self.eve_observables(), &self.bob_outcome)?,
            RrConditioning::OptimalEstimators => {
                let k = self
                    .estimators
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("no estimators for this protocol".into()))?;
                let eve = self.eve_observables();
                let ve = self.model.cross_covariance(&eve, &eve);
                let c = self.model.cross_covariance(&eve, &self.bob_outcome);
                let d = self.model.cross_covariance(&self.bob_outcome, &self.bob_outcome);
                let r = ve - k * c.transpose() - &c * k.transpose() + k * d * k.transpose();
                (&r + r.transpose()) * 0.5
            }
        };
        Ok(s_e - crate::gaussian::symplectic_spectrum_of(&cond)?.entropy()?)
    }

    /// Quantum mutual information `I(B : E) = S(B) + S(E) - S(BE)`.
    pub fn bob_eve_mutual_information(&self) -> Result<f64> {
        let mut both = self.bob_modes.clone();
        both.extend(&self.eve_modes);
        Ok(self.model.conditional_entropy(&self.bob_modes, &[])?
            + self.model.conditional_entropy(&self.eve_modes, &[])?
            - self.model.conditional_entropy(&both, &[])?)
    }
}

pub fn exact_rate(protocol: Protocol, recon: Reconciliation, v: f64, params: &AttackParams) -> Result<RateResult> {
    exact_rate_with(protocol, recon, v, params, &ExactOptions::default())
}

pub fn exact_rate_with(
    protocol: Protocol,
    recon: Reconciliation,
    v: f64,
    params: &AttackParams,
    options: &ExactOptions,
) -> Result<RateResult> {
    let net = build_network(protocol, v, params, options)?;
    let rate = match (protocol.is_collective(), recon) {
        (true, Reconciliation::Direct) => {
            Rate::Finite(net.holevo_alice(&net.bob_modes)? - net.holevo_alice(&net.eve_modes)?)
        }
        (true, Reconciliation::Reverse) if protocol == Protocol::CollHet => {
            Rate::Finite(net.holevo_alice(&net.bob_modes)? - net.bob_eve_mutual_information()?)
        }
        (true, Reconciliation::Reverse) => Rate::NegInfinity,
        (false, Reconciliation::Direct) => Rate::Finite(net.shannon_information()? - net.holevo_alice(&net.eve_modes)?),
        (false, Reconciliation::Reverse) => {
            Rate::Finite(net.shannon_information()? - net.holevo_bob_eve(options.conditioning)?)
        }
    };
    Ok(RateResult {
        protocol,
        reconciliation: recon,
        rate,
        method: Method::ExactFiniteV,
        params: *params,
        modulation: Some(v),
    })
}
