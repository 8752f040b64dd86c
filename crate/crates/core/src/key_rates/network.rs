use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_spectrum_of, CovarianceMatrix, Quadrature, SymplecticSpectrum, SymplecticTransform};

/// Joint second moments of classical modulation variables and quadrature
/// operators, propagated through a linear optical network.
///
/// The state vector is `z = (c_1 .. c_k, Q_1, P_1, .. Q_n, P_n)`. Quadratures
/// carry their symmetrised covariance; classical variables are ordinary Gaussian
/// random variables. Conditioning on any set of mutually commuting linear
/// observables is a Schur complement of this joint matrix.
#[derive(Debug, Clone)]
pub struct PhaseSpaceModel {
    n_classical: usize,
    n_modes: usize,
    cov: DMatrix<f64>,
}

/// A real linear functional of `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(pub DVector<f64>);

impl PhaseSpaceModel {
    /// Independent zero-mean classical variables with the given variances.
    pub fn with_classical(variances: &[f64]) -> Self {
        let k = variances.len();
        let cov = DMatrix::from_diagonal(&DVector::from_column_slice(variances));
        Self { n_classical: k, n_modes: 0, cov }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Appends modes in state `cm`; returns the index of the first new mode.
    pub fn add_modes(&mut self, cm: &CovarianceMatrix) -> usize {
        let first = self.n_modes;
        let (old, add) = (self.cov.nrows(), cm.matrix().nrows());
        let mut next = DMatrix::zeros(old + add, old + add);
        next.view_mut((0, 0), (old, old)).copy_from(&self.cov);
        next.view_mut((old, old), (add, add)).copy_from(cm.matrix());
        self.cov = next;
        self.n_modes += cm.n_modes();
        first
    }

    pub fn index(&self, mode: usize, quadrature: Quadrature) -> usize {
        let k = match quadrature {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        };
        self.n_classical + 2 * mode + k
    }

    fn apply_linear(&mut self, map: &DMatrix<f64>) {
        let next = map * &self.cov * map.transpose();
        self.cov = (&next + next.transpose()) * 0.5;
    }

    /// Applies `s` to the listed modes.
    pub fn apply(&mut self, s: &SymplecticTransform, modes: &[usize]) -> Result<()> {
        let lifted = s.embed(self.n_modes, modes)?;
        let dim = self.dim();
        let mut map = DMatrix::identity(dim, dim);
        let k = self.n_classical;
        map.view_mut((k, k), (dim - k, dim - k)).copy_from(lifted.matrix());
        self.apply_linear(&map);
        Ok(())
    }

    /// Displaces `mode` by the classical variables `(q_var, p_var)`.
    pub fn displace(&mut self, mode: usize, q_var: usize, p_var: usize) -> Result<()> {
        if q_var >= self.n_classical || p_var >= self.n_classical || mode >= self.n_modes {
            return Err(Error::InvalidParameter("displacement index out of range".into()));
        }
        let dim = self.dim();
        let mut map = DMatrix::identity(dim, dim);
        map[(self.index(mode, Quadrature::Q), q_var)] = 1.0;
        map[(self.index(mode, Quadrature::P), p_var)] = 1.0;
        self.apply_linear(&map);
        Ok(())
    }

    pub fn classical(&self, var: usize) -> Observable {
        let mut v = DVector::zeros(self.dim());
        v[var] = 1.0;
        Observable(v)
    }

    pub fn quadrature(&self, mode: usize, quadrature: Quadrature) -> Observable {
        let mut v = DVector::zeros(self.dim());
        v[self.index(mode, quadrature)] = 1.0;
        Observable(v)
    }

    /// Both quadratures of each listed mode, in order.
    pub fn mode_observables(&self, modes: &[usize]) -> Vec<Observable> {
        modes.iter().flat_map(|&m| [self.quadrature(m, Quadrature::Q), self.quadrature(m, Quadrature::P)]).collect()
    }

    fn stack(&self, obs: &[Observable]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(obs.len(), self.dim());
        for (i, o) in obs.iter().enumerate() {
            m.row_mut(i).copy_from(&o.0.transpose());
        }
        m
    }

    /// `Cov(a, b)`.
    pub fn cross_covariance(&self, a: &[Observable], b: &[Observable]) -> DMatrix<f64> {
        self.stack(a) * &self.cov * self.stack(b).transpose()
    }

    /// Covariance of `keep` conditioned on the outcomes of `on`.
    pub fn conditional(&self, keep: &[Observable], on: &[Observable]) -> Result<DMatrix<f64>> {
        let a = self.cross_covariance(keep, keep);
        if on.is_empty() {
            return Ok(a);
        }
        let b = self.cross_covariance(keep, on);
        let d = self.cross_covariance(on, on);
        let inv = d.clone().cholesky().map(|c| c.inverse()).ok_or(Error::ZeroVariance)?;
        let out = a - &b * inv * b.transpose();
        Ok((&out + out.transpose()) * 0.5)
    }

    pub fn conditional_spectrum(&self, modes: &[usize], on: &[Observable]) -> Result<SymplecticSpectrum> {
        let keep = self.mode_observables(modes);
        symplectic_spectrum_of(&self.conditional(&keep, on)?)
    }

    pub fn conditional_entropy(&self, modes: &[usize], on: &[Observable]) -> Result<f64> {
        self.conditional_spectrum(modes, on)?.entropy()
    }
}

impl Observable {
    pub fn scaled(&self, k: f64) -> Observable {
        Observable(&self.0 * k)
    }

    pub fn plus(&self, other: &Observable) -> Observable {
        Observable(&self.0 + &other.0)
    }

    pub fn minus(&self, other: &Observable) -> Observable {
        Observable(&self.0 - &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{beam_splitter, condition_on_homodyne, epr_cm, vacuum_cm};

    #[test]
    fn displacement_adds_classical_variance() {
        let mut net = PhaseSpaceModel::with_classical(&[4.0, 4.0]);
        let a = net.add_modes(&vacuum_cm(1));
        net.displace(a, 0, 1).unwrap();
        let cov = net.conditional(&net.mode_observables(&[a]), &[]).unwrap();
        assert!((cov - DMatrix::identity(2, 2) * 5.0).amax() < 1e-15);
        let given_q = net.conditional(&net.mode_observables(&[a]), &[net.classical(0)]).unwrap();
        assert!((given_q[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((given_q[(1, 1)] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_conditioning_matches_homodyne() {
        let mut net = PhaseSpaceModel::with_classical(&[]);
        net.add_modes(&epr_cm(3.0).unwrap());
        net.add_modes(&vacuum_cm(1));
        net.apply(&beam_splitter(0.4).unwrap(), &[1, 2]).unwrap();
        let full = CovarianceMatrix::from_symmetric(net.covariance().clone()).unwrap();
        let direct = condition_on_homodyne(&full, 1, Quadrature::Q).unwrap();
        let via_net = net.conditional(&net.mode_observables(&[0, 2]), &[net.quadrature(1, Quadrature::Q)]).unwrap();
        assert!((direct.matrix() - via_net).amax() < 1e-12);
    }
}
