use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::spectrum::symplectic_spectrum_of;
use super::{PHYSICAL_TOL, SYMMETRY_TOL};
use crate::error::{Error, Result};

/// The block-diagonal symplectic form `Omega` on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub fn omega(n_modes: usize) -> SymplecticForm {
    let dim = 2 * n_modes;
    let mut matrix = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        matrix[(2 * k, 2 * k + 1)] = 1.0;
        matrix[(2 * k + 1, 2 * k)] = -1.0;
    }
    SymplecticForm { n_modes, matrix }
}

/// Mean quadrature vector `(Q1, P1, ...)` in shot-noise units.
///
/// A coherent amplitude `alpha = (Q + iP)/2` is stored as the pair `(Q, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementVector(pub DVector<f64>);

impl DisplacementVector {
    pub fn zeros(n_modes: usize) -> Self {
        Self(DVector::zeros(2 * n_modes))
    }

    pub fn from_amplitude(q: f64, p: f64) -> Self {
        Self(DVector::from_vec(vec![q, p]))
    }

    pub fn n_modes(&self) -> usize {
        self.0.len() / 2
    }
}

/// Real symmetric `2n x 2n` covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn check_shape(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "covariance matrix must be 2n x 2n, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

impl CovarianceMatrix {
    /// Validates shape, symmetry, and the uncertainty principle.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let cm = Self::from_symmetric(matrix)?;
        let spectrum = cm.spectrum()?;
        let floor = 1.0 - cm.physical_tolerance();
        if let Some(&min) = spectrum.values().last() {
            if min < floor {
                return Err(Error::Unphysical(min));
            }
        }
        Ok(cm)
    }

    /// Validates shape and symmetry only. The matrix is symmetrised exactly.
    pub fn from_symmetric(matrix: DMatrix<f64>) -> Result<Self> {
        check_shape(&matrix)?;
        check_symmetric(&matrix)?;
        Ok(Self::from_matrix_unchecked(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Self { matrix: sym }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn spectrum(&self) -> Result<super::SymplecticSpectrum> {
        symplectic_spectrum_of(&self.matrix)
    }

    /// `1e-9` plus the rounding floor of the eigensolver at this matrix scale.
    pub fn physical_tolerance(&self) -> f64 {
        PHYSICAL_TOL + 64.0 * f64::EPSILON * self.matrix.amax()
    }

    pub fn is_physical(&self) -> bool {
        match self.spectrum() {
            Ok(s) => s.min() >= 1.0 - self.physical_tolerance(),
            Err(_) => false,
        }
    }

    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (a, b) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        CovarianceMatrix { matrix: m }
    }

    /// Reduced state of the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<CovarianceMatrix> {
        let n = self.n_modes();
        let mut idx = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            if m >= n {
                return Err(Error::InvalidParameter(format!("mode {m} out of range for {n} modes")));
            }
            idx.push(2 * m);
            idx.push(2 * m + 1);
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        Ok(CovarianceMatrix { matrix: sub })
    }

    /// Row-major CSV dump: a `n_modes` header line followed by `2n` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_modes,{}", self.n_modes());
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> =
                (0..self.matrix.ncols()).map(|j| crate::output::fmt_num(self.matrix[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CM csv".into()))?;
        let n: usize = header
            .strip_prefix("n_modes,")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        let dim = 2 * n;
        let mut data = Vec::with_capacity(dim * dim);
        for line in lines {
            for cell in line.split(',') {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse(format!("bad number `{cell}`")))?;
                data.push(v);
            }
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, &data))
    }
}

pub fn vacuum_cm(n_modes: usize) -> CovarianceMatrix {
    CovarianceMatrix { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
}

/// Single-mode thermal state `W I`.
pub fn thermal_cm(w: f64) -> Result<CovarianceMatrix> {
    if !(w >= 1.0) {
        return Err(Error::InvalidParameter(format!("thermal variance must be >= 1, got {w}")));
    }
    Ok(CovarianceMatrix { matrix: DMatrix::identity(2, 2) * w })
}

/// Two-mode squeezed vacuum with local variance `v`: `[[vI, cZ], [cZ, vI]]`, `c = sqrt(v^2 - 1)`.
pub fn epr_cm(v: f64) -> Result<CovarianceMatrix> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("EPR variance must be >= 1, got {v}")));
    }
    let c = (v * v - 1.0).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        v,   0.0, c,   0.0,
        0.0, v,   0.0, -c,
        c,   0.0, v,   0.0,
        0.0, -c,  0.0, v,
    ]);
    Ok(CovarianceMatrix { matrix: m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_single_mode() {
        let w = omega(1);
        assert_eq!(w.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn omega_two_modes_is_direct_sum() {
        let w = omega(2).into_matrix();
        let block = omega(1).into_matrix();
        assert_eq!(w.view((0, 0), (2, 2)), block);
        assert_eq!(w.view((2, 2), (2, 2)), block);
        assert_eq!(w.view((0, 2), (2, 2)), DMatrix::<f64>::zeros(2, 2));
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        for n in 1..5 {
            let w = omega(n).into_matrix();
            assert_eq!(&w * &w, -DMatrix::<f64>::identity(2 * n, 2 * n));
            assert_eq!(w.transpose(), -w);
        }
    }

    #[test]
    fn epr_at_unit_variance_is_vacuum() {
        assert_eq!(epr_cm(1.0).unwrap(), vacuum_cm(2));
    }

    #[test]
    fn epr_off_diagonal() {
        let m = epr_cm(2.0).unwrap().into_matrix();
        assert!((m[(0, 2)] - 3f64.sqrt()).abs() < 1e-15);
        assert!((m[(1, 3)] + 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn epr_rejects_sub_vacuum() {
        assert!(epr_cm(0.9).is_err());
        assert!(epr_cm(f64::NAN).is_err());
    }

    #[test]
    fn rejects_asymmetric_and_unphysical() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.1;
        assert!(matches!(CovarianceMatrix::new(m), Err(Error::NotSymmetric(_))));
        let squeezed_too_much = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0]));
        assert!(matches!(CovarianceMatrix::new(squeezed_too_much), Err(Error::Unphysical(_))));
    }

    #[test]
    fn csv_round_trip() {
        let cm = epr_cm(3.5).unwrap();
        let back = CovarianceMatrix::from_csv(&cm.to_csv()).unwrap();
        assert!((back.matrix() - cm.matrix()).amax() < 1e-10);
    }
}
