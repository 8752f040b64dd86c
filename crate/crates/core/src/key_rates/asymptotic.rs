//! Closed-form rates in the large-modulation limit `V -> infinity`, in bits.

use std::f64::consts::E;

use super::{het2_rr_eigenvalues, Method, Protocol, Rate, RateResult, Reconciliation};
use crate::attacks::AttackParams;
use crate::error::Result;
use crate::gaussian::g_entropy;

fn g(nu: f64) -> Result<f64> {
    g_entropy(nu)
}

fn b1(p: &AttackParams) -> f64 {
    (1.0 - p.t) * p.w + p.t
}

fn e1(p: &AttackParams) -> f64 {
    (1.0 - p.t) + p.t * p.w
}

fn result(protocol: Protocol, recon: Reconciliation, params: &AttackParams, bits: f64) -> RateResult {
    RateResult {
        protocol,
        reconciliation: recon,
        rate: Rate::Finite(bits),
        method: Method::Asymptotic,
        params: *params,
        modulation: None,
    }
}

fn checked(params: &AttackParams) -> Result<&AttackParams> {
    params.require_open()?;
    Ok(params)
}

/// `log T/(1-T) - g(W)`.
pub fn rate_dr_coll_het(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let r = (p.t / (1.0 - p.t)).log2() - g(p.w)?;
    Ok(result(Protocol::CollHet, Reconciliation::Direct, p, r))
}

/// Shared by the individual and collective homodyne protocols in DR.
pub fn dr_hom_bits(params: &AttackParams) -> Result<f64> {
    let p = checked(params)?;
    let (b, e) = (b1(p), e1(p));
    Ok(0.5 * (p.t * e / ((1.0 - p.t) * b)).log2() + g((p.w * b / e).sqrt())? - g(p.w)?)
}

/// `1/2 log T e1/((1-T) b1) + g(sqrt(W b1/e1)) - g(W)`.
pub fn rate_dr_hom(params: &AttackParams) -> Result<RateResult> {
    Ok(result(Protocol::Hom, Reconciliation::Direct, params, dr_hom_bits(params)?))
}

pub fn rate_dr_coll_hom(params: &AttackParams) -> Result<RateResult> {
    Ok(result(Protocol::CollHom, Reconciliation::Direct, params, dr_hom_bits(params)?))
}

/// `log 2T/(e(1-T)(1+b1)) + g(b1) - g(W)`.
pub fn rate_dr_het(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let b = b1(p);
    let r = (2.0 * p.t / (E * (1.0 - p.t) * (1.0 + b))).log2() + g(b)? - g(p.w)?;
    Ok(result(Protocol::Het, Reconciliation::Direct, p, r))
}

/// `log 1/(1-T) - g(W) - g(b1)`.
pub fn rate_rr_coll_het(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let r = -(1.0 - p.t).log2() - g(p.w)? - g(b1(p))?;
    Ok(result(Protocol::CollHet, Reconciliation::Reverse, p, r))
}

/// `1/2 log W/((1-T) b1) - g(W)`.
pub fn rate_rr_hom(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let r = 0.5 * (p.w / ((1.0 - p.t) * b1(p))).log2() - g(p.w)?;
    Ok(result(Protocol::Hom, Reconciliation::Reverse, p, r))
}

/// `log 2T/(e(1-T)(1+b1)) + g((1-T+b1)/T) - g(W)`.
pub fn rate_rr_het(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let b = b1(p);
    let r = (2.0 * p.t / (E * (1.0 - p.t) * (1.0 + b))).log2() + g((1.0 - p.t + b) / p.t)? - g(p.w)?;
    Ok(result(Protocol::Het, Reconciliation::Reverse, p, r))
}

fn dr_hom2_bits(params: &AttackParams) -> Result<f64> {
    let p = checked(params)?;
    Ok(0.5 * (p.t / (1.0 - p.t).powi(2)).log2() - g(p.w)?)
}

/// `1/2 log T/(1-T)^2 - g(W)`, shared by the individual and collective homodyne two-way protocols.
pub fn rate_dr_coll_hom2(params: &AttackParams) -> Result<RateResult> {
    Ok(result(Protocol::CollHom2, Reconciliation::Direct, params, dr_hom2_bits(params)?))
}

pub fn rate_dr_hom2(params: &AttackParams) -> Result<RateResult> {
    Ok(result(Protocol::Hom2, Reconciliation::Direct, params, dr_hom2_bits(params)?))
}

/// Twice the homodyne collective two-way rate.
pub fn rate_dr_coll_het2(params: &AttackParams) -> Result<RateResult> {
    Ok(result(Protocol::CollHet2, Reconciliation::Direct, params, 2.0 * dr_hom2_bits(params)?))
}

fn het2_shannon_minus_log(p: &AttackParams) -> f64 {
    let t = p.t;
    (2.0 * t * (1.0 + t) / (E * (1.0 - t) * (1.0 + t * t + (1.0 - t * t) * p.w))).log2()
}

/// `log 2T(1+T)/(e(1-T)[1+T^2+(1-T^2)W]) - g(W)`.
pub fn rate_dr_het2(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let r = het2_shannon_minus_log(p) - g(p.w)?;
    Ok(result(Protocol::Het2, Reconciliation::Direct, p, r))
}

/// `1/2 log (1-T+T^2)/(1-T)^2 - g(W)`.
pub fn rate_rr_hom2(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let t = p.t;
    let r = 0.5 * ((1.0 - t + t * t) / (1.0 - t).powi(2)).log2() - g(p.w)?;
    Ok(result(Protocol::Hom2, Reconciliation::Reverse, p, r))
}

/// `log 2T(1+T)/(e(1-T)[1+T^2+(1-T^2)W]) + sum_i g(n_i) - 2 g(W)`, with the `n_i`
/// extracted numerically (see [`het2_rr_eigenvalues`]).
pub fn rate_rr_het2(params: &AttackParams) -> Result<RateResult> {
    let p = checked(params)?;
    let n = het2_rr_eigenvalues(p)?;
    let mut r = het2_shannon_minus_log(p) - 2.0 * g(p.w)?;
    for x in n {
        r += g(x)?;
    }
    Ok(result(Protocol::Het2, Reconciliation::Reverse, p, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(t: f64, w: f64) -> AttackParams {
        AttackParams::new(t, w).unwrap()
    }

    fn bits(r: Result<RateResult>) -> f64 {
        r.unwrap().bits()
    }

    #[test]
    fn coll_het_dr_values() {
        assert!(bits(rate_dr_coll_het(&p(0.5, 1.0))).abs() < 1e-15);
        assert!((bits(rate_dr_coll_het(&p(0.75, 1.0))) - 3f64.log2()).abs() < 1e-14);
        assert!((bits(rate_dr_coll_het(&p(0.5, 3.0))) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn hom_dr_values() {
        for t in [0.2f64, 0.5, 0.9] {
            let expected = 0.5 * (t / (1.0 - t)).log2();
            assert!((bits(rate_dr_hom(&p(t, 1.0))) - expected).abs() < 1e-14);
        }
        assert!(bits(rate_dr_hom(&p(0.5, 1.0))).abs() < 1e-15);
        assert!((bits(rate_dr_hom(&p(0.9, 1.0))) - 0.5 * 9f64.log2()).abs() < 1e-14);
        assert_eq!(bits(rate_dr_hom(&p(0.63, 2.1))), bits(rate_dr_coll_hom(&p(0.63, 2.1))));
    }

    #[test]
    fn het_dr_values() {
        assert!((bits(rate_dr_het(&p(0.5, 1.0))) + std::f64::consts::LOG2_E).abs() < 1e-14);
        let root = E / (1.0 + E);
        assert!(bits(rate_dr_het(&p(root, 1.0))).abs() < 1e-14);
    }

    #[test]
    fn coll_het_rr_values() {
        assert!((bits(rate_rr_coll_het(&p(0.5, 1.0))) - 1.0).abs() < 1e-15);
        for t in [0.1, 0.4, 0.95] {
            assert!((bits(rate_rr_coll_het(&p(t, 1.0))) + (1.0 - t).log2()).abs() < 1e-14);
        }
        let expected = 1.0 - 2.0 - g(2.0).unwrap();
        assert!((bits(rate_rr_coll_het(&p(0.5, 3.0))) - expected).abs() < 1e-14);
        assert!(expected < 0.0);
    }

    #[test]
    fn hom_rr_values() {
        for t in [0.05, 0.5, 0.95] {
            let r = bits(rate_rr_hom(&p(t, 1.0)));
            assert!((r - 0.5 * (1.0 / (1.0 - t)).log2()).abs() < 1e-14);
            assert!(r > 0.0);
        }
        let expected = 0.5 * (2.0f64 / 0.75).log2() - g(2.0).unwrap();
        assert!((bits(rate_rr_hom(&p(0.5, 2.0))) - expected).abs() < 1e-14);
    }

    #[test]
    fn het_rr_values() {
        let t = 0.6;
        let expected = (2.0 * t / (2.0 * E * (1.0 - t))).log2() + g((2.0 - t) / t).unwrap();
        assert!((bits(rate_rr_het(&p(t, 1.0))) - expected).abs() < 1e-14);
        assert!(bits(rate_rr_het(&p(0.9, 1.0))) > 0.0);
    }

    #[test]
    fn two_way_dr_values() {
        let root = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(bits(rate_dr_coll_hom2(&p(root, 1.0))).abs() < 1e-14);
        assert!((bits(rate_dr_coll_hom2(&p(0.5, 1.0))) - 0.5).abs() < 1e-15);
        assert!((bits(rate_dr_coll_hom2(&p(0.5, 3.0))) + 1.5).abs() < 1e-14);
        assert!((bits(rate_dr_coll_het2(&p(0.5, 1.0))) - 1.0).abs() < 1e-15);
        assert_eq!(bits(rate_dr_hom2(&p(0.3, 1.7))), bits(rate_dr_coll_hom2(&p(0.3, 1.7))));
        assert!((bits(rate_dr_het2(&p(0.5, 1.0))) - (1.5 / E).log2()).abs() < 1e-14);
    }

    #[test]
    fn het2_dr_pure_loss_root() {
        // T (1 + T) = e (1 - T)
        let root = (-(1.0 + E) + ((1.0 + E).powi(2) + 4.0 * E).sqrt()) / 2.0;
        assert!((root - 0.625_66).abs() < 1e-4);
        assert!(bits(rate_dr_het2(&p(root, 1.0))).abs() < 1e-13);
    }

    #[test]
    fn hom2_rr_values() {
        assert!((bits(rate_rr_hom2(&p(0.5, 1.0))) - 0.5 * 3f64.log2()).abs() < 1e-14);
        for k in 1..50 {
            assert!(bits(rate_rr_hom2(&p(k as f64 / 50.0, 1.0))) > 0.0);
        }
    }

    #[test]
    fn endpoints_rejected() {
        assert!(rate_dr_coll_het(&p(1.0, 1.0)).is_err());
        assert!(rate_rr_hom(&p(0.0, 1.0)).is_err());
    }
}
