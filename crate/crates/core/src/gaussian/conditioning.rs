use nalgebra::DMatrix;

use super::CovarianceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

struct Split {
    rest: DMatrix<f64>,
    cross: DMatrix<f64>,
    measured: DMatrix<f64>,
}

fn split(cm: &CovarianceMatrix, mode: usize) -> Result<Split> {
    let n = cm.n_modes();
    if mode >= n {
        return Err(Error::InvalidParameter(format!("mode {mode} out of range for {n} modes")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("conditioning needs at least two modes".into()));
    }
    let v = cm.matrix();
    let rest: Vec<usize> = (0..2 * n).filter(|&i| i / 2 != mode).collect();
    let meas = [2 * mode, 2 * mode + 1];
    Ok(Split {
        rest: DMatrix::from_fn(rest.len(), rest.len(), |i, j| v[(rest[i], rest[j])]),
        cross: DMatrix::from_fn(rest.len(), 2, |i, j| v[(rest[i], meas[j])]),
        measured: DMatrix::from_fn(2, 2, |i, j| v[(meas[i], meas[j])]),
    })
}

/// Conditional CM of the remaining modes after homodyning `quadrature` of `mode`.
///
/// `V_A - C (Pi V_B Pi)^+ C^T` with `Pi` the rank-one projector on the measured
/// quadrature. The outcome value only shifts the mean, so it does not appear.
pub fn condition_on_homodyne(cm: &CovarianceMatrix, mode: usize, quadrature: Quadrature) -> Result<CovarianceMatrix> {
    let Split { rest, cross, measured } = split(cm, mode)?;
    let k = quadrature.offset();
    let var = measured[(k, k)];
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let col = cross.column(k);
    let out = rest - (col * col.transpose()) / var;
    Ok(CovarianceMatrix::from_matrix_unchecked(out))
}

/// Conditional CM of the remaining modes after heterodyning `mode`: `V_A - C (V_B + I)^-1 C^T`.
pub fn condition_on_heterodyne(cm: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    let Split { rest, cross, measured } = split(cm, mode)?;
    let inv = (measured + DMatrix::identity(2, 2)).try_inverse().ok_or(Error::ZeroVariance)?;
    let out = rest - &cross * inv * cross.transpose();
    Ok(CovarianceMatrix::from_matrix_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{epr_cm, symplectic_eigenvalues, thermal_cm, vacuum_cm};

    #[test]
    fn homodyne_on_epr_gives_squeezed_state() {
        let v = 7.0;
        let out = condition_on_homodyne(&epr_cm(v).unwrap(), 1, Quadrature::Q).unwrap();
        let m = out.matrix();
        assert!((m[(0, 0)] - 1.0 / v).abs() < 1e-12);
        assert!((m[(1, 1)] - v).abs() < 1e-12);
        assert!(m[(0, 1)].abs() < 1e-15);
        assert!((symplectic_eigenvalues(&out).unwrap().values()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn heterodyne_on_epr_gives_coherent_state() {
        for v in [1.0, 2.0, 10.0, 1e3] {
            let out = condition_on_heterodyne(&epr_cm(v).unwrap(), 0).unwrap();
            assert!((out.matrix() - vacuum_cm(1).matrix()).amax() < 1e-9, "V = {v}");
        }
    }

    #[test]
    fn product_state_is_unaffected() {
        let cm = thermal_cm(3.0).unwrap().direct_sum(&thermal_cm(5.0).unwrap());
        let hom = condition_on_homodyne(&cm, 0, Quadrature::P).unwrap();
        assert_eq!(hom.matrix(), thermal_cm(5.0).unwrap().matrix());
        let het = condition_on_heterodyne(&cm, 1).unwrap();
        assert_eq!(het.matrix(), thermal_cm(3.0).unwrap().matrix());
    }

    #[test]
    fn zero_variance_is_an_error() {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = 0.0;
        let cm = CovarianceMatrix::from_symmetric(m).unwrap();
        assert_eq!(condition_on_homodyne(&cm, 1, Quadrature::Q), Err(Error::ZeroVariance));
    }

    #[test]
    fn bad_mode_index() {
        assert!(condition_on_homodyne(&epr_cm(2.0).unwrap(), 2, Quadrature::Q).is_err());
        assert!(condition_on_heterodyne(&thermal_cm(2.0).unwrap(), 0).is_err());
    }
}
