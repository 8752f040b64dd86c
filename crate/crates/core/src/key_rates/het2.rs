//! The three finite eigenvalues `n1, n2, n3` of Eve's CM conditioned on Bob's
//! heterodyne two-way outcome, which enter the reverse-reconciliation rate.

use super::exact::{build_network, ExactOptions};
use super::Protocol;
use crate::attacks::AttackParams;
use crate::error::{Error, Result};

/// Floor on the smallest of the four modulations.
const V_BASE: f64 = 5e4;
const PRODUCT_TOL: f64 = 1e-6;

/// `n1 n2 n3 = [1 + T^3 + (1-T)(1+T^2) W] W / (T (1+T))`.
pub fn n_product_closed_form(params: &AttackParams) -> f64 {
    let AttackParams { t, w } = *params;
    (1.0 + t.powi(3) + (1.0 - t) * (1.0 + t * t) * w) * w / (t * (1.0 + t))
}

fn finite_eigenvalues(v: f64, params: &AttackParams) -> Result<[f64; 3]> {
    let net = build_network(Protocol::Het2, v, params, &ExactOptions::default())?;
    let eve = net.model.mode_observables(&net.eve_modes);
    let cond = net.model.conditional(&eve, &net.bob_outcome)?;
    let spectrum = crate::gaussian::symplectic_spectrum_of(&cond)?;
    let big = (1.0 - params.t * params.t) * v;
    let kept: Vec<f64> = spectrum.values().iter().copied().filter(|x| (x - big).abs() > 0.01 * big).collect();
    match kept.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Extraction(format!(
            "expected exactly one eigenvalue near (1-T^2)V = {big:e}, spectrum {:?}",
            spectrum.values()
        ))),
    }
}

/// Extracts `n1 >= n2 >= n3` from the conditional spectrum.
///
/// The finite eigenvalues approach their limit as a power series in `1/V`, so
/// they are evaluated at `V0, 2V0, 4V0, 8V0` and combined by third-order
/// Richardson extrapolation. Errors if the product misses
/// the closed form by more than `1e-6` relative.
pub fn het2_rr_eigenvalues(params: &AttackParams) -> Result<[f64; 3]> {
    params.require_open()?;
    let (t, w) = (params.t, params.w);
    // Large enough for the divergent eigenvalue to sit inside its 1% band and for
    // the series in 1/V to converge at small T; no larger, since roundoff grows with V.
    let base = V_BASE.max(200.0 * (w + 1.0) / (1.0 - t * t)).max(2.0 * w / (t * t));
    let mut f = [[0.0; 3]; 4];
    for (k, row) in f.iter_mut().enumerate() {
        *row = finite_eigenvalues(base * (1u32 << k) as f64, params)?;
    }
    let mut n = [0.0; 3];
    for i in 0..3 {
        let x = (64.0 * f[3][i] - 56.0 * f[2][i] + 14.0 * f[1][i] - f[0][i]) / 21.0;
        n[i] = x.max(1.0);
    }
    let product: f64 = n.iter().product();
    let expected = n_product_closed_form(params);
    let rel = ((product - expected) / expected).abs();
    if rel > PRODUCT_TOL {
        return Err(Error::Extraction(format!(
            "n1 n2 n3 = {product} differs from closed form {expected} (relative {rel:e})"
        )));
    }
    Ok(n)
}
