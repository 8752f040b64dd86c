use nalgebra::DMatrix;

use super::matrix::omega;
use super::CovarianceMatrix;
use crate::error::{Error, Result};

/// A real `2n x 2n` matrix preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("symplectic matrix must be 2n x 2n".into()));
        }
        let s = Self { matrix };
        let err = s.symplectic_defect();
        if err > 1e-10 * s.matrix.amax().powi(2).max(1.0) {
            return Err(Error::InvalidParameter(format!("matrix is not symplectic (defect {err:e})")));
        }
        Ok(s)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |S^T Omega S - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let w = omega(self.n_modes()).into_matrix();
        (self.matrix.transpose() * &w * &self.matrix - w).amax()
    }

    /// Lifts this transform onto `modes` of an `n_modes`-mode system, identity elsewhere.
    pub fn embed(&self, n_modes: usize, modes: &[usize]) -> Result<Self> {
        if modes.len() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), got: modes.len() });
        }
        if modes.iter().any(|&m| m >= n_modes) {
            return Err(Error::InvalidParameter(format!("mode index out of range for {n_modes} modes")));
        }
        let mut out = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = self.matrix[(a, b)];
            }
        }
        Ok(Self { matrix: out })
    }

    pub fn compose(&self, then: &SymplecticTransform) -> Result<Self> {
        if self.matrix.nrows() != then.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), got: then.matrix.nrows() });
        }
        Ok(Self { matrix: &then.matrix * &self.matrix })
    }
}

/// Beam splitter of transmission `t` on modes `(a, e)`:
/// `a' = sqrt(t) a + sqrt(1-t) e`, `e' = -sqrt(1-t) a + sqrt(t) e`, quadrature by quadrature.
pub fn beam_splitter(t: f64) -> Result<SymplecticTransform> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("transmission must lie in [0, 1], got {t}")));
    }
    let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
    let mut m = DMatrix::zeros(4, 4);
    for q in 0..2 {
        m[(q, q)] = c;
        m[(q, 2 + q)] = s;
        m[(2 + q, q)] = -s;
        m[(2 + q, 2 + q)] = c;
    }
    Ok(SymplecticTransform { matrix: m })
}

pub fn apply_transform(cm: &CovarianceMatrix, s: &SymplecticTransform) -> Result<CovarianceMatrix> {
    if cm.matrix().nrows() != s.matrix().nrows() {
        return Err(Error::DimensionMismatch { expected: cm.matrix().nrows(), got: s.matrix().nrows() });
    }
    let out = s.matrix() * cm.matrix() * s.matrix().transpose();
    Ok(CovarianceMatrix::from_matrix_unchecked(out))
}
