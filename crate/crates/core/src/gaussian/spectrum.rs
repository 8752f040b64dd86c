use nalgebra::DMatrix;

use super::matrix::{check_shape, check_symmetric, omega};
use super::{CovarianceMatrix, PAIRING_TOL};
use crate::error::{Error, Result};

/// Williamson eigenvalues `nu_1 >= ... >= nu_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    /// Sorts the values into descending order.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.values.iter().all(|v| (v - 1.0).abs() <= tol)
    }

    /// Entropy `sum_k g(nu_k)` in bits.
    pub fn entropy(&self) -> Result<f64> {
        self.values.iter().map(|&v| super::g_entropy(v)).sum()
    }
}

pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    symplectic_spectrum_of(cm.matrix())
}

/// Moduli of the eigenvalues of `Omega V`, which come in `+/- i nu` pairs.
///
/// For positive-definite `V = L L^T` these are the singular values of the
/// antisymmetric `L^T Omega L`, which are computed stably even when `V` is badly
/// conditioned. Other inputs fall back to the eigenvalues of `Omega V`.
pub fn symplectic_spectrum_of(v: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    check_shape(v)?;
    check_symmetric(v)?;
    match v.clone().cholesky() {
        Some(chol) => paired_singular_values(v, chol.l()),
        None => eigen_pairs(v),
    }
}

fn paired_singular_values(v: &DMatrix<f64>, l: DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n = v.nrows() / 2;
    let a = l.transpose() * omega(n).into_matrix() * l;
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let scale = v.amax().max(1.0);
    let mut worst = 0.0_f64;
    let values: Vec<f64> = sv
        .chunks_exact(2)
        .map(|p| {
            worst = worst.max((p[0] - p[1]).abs());
            0.5 * (p[0] + p[1])
        })
        .collect();
    if worst > PAIRING_TOL * scale || values.iter().any(|x| !x.is_finite()) {
        return Err(Error::BrokenSpectrum(worst));
    }
    Ok(SymplecticSpectrum::new(values))
}

fn eigen_pairs(v: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n = v.nrows() / 2;
    let ov = omega(n).into_matrix() * v;
    let eig = ov.complex_eigenvalues();
    let scale = v.amax().max(1.0);

    let mut upper: Vec<f64> = Vec::with_capacity(n);
    let mut lower: Vec<f64> = Vec::with_capacity(n);
    let mut worst = 0.0_f64;
    for z in eig.iter() {
        worst = worst.max(z.re.abs());
        if z.im >= 0.0 {
            upper.push(z.im);
        } else {
            lower.push(-z.im);
        }
    }
    // Real eigenvalues (|im| ~ 0) can land on either side; rebalance before pairing.
    while upper.len() > lower.len() {
        let (i, _) = min_entry(&upper);
        lower.push(upper.swap_remove(i));
    }
    while lower.len() > upper.len() {
        let (i, _) = min_entry(&lower);
        upper.push(lower.swap_remove(i));
    }
    upper.sort_by(|a, b| b.total_cmp(a));
    lower.sort_by(|a, b| b.total_cmp(a));

    let mut values = Vec::with_capacity(n);
    for (a, b) in upper.iter().zip(&lower) {
        worst = worst.max((a - b).abs());
        values.push(0.5 * (a + b));
    }
    if worst > PAIRING_TOL * scale || values.iter().any(|x| !x.is_finite()) {
        return Err(Error::BrokenSpectrum(worst));
    }
    Ok(SymplecticSpectrum::new(values))
}

fn min_entry(xs: &[f64]) -> (usize, f64) {
    xs.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty")
}
