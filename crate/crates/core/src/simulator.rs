//! Seeded Monte-Carlo of the prepare-and-measure protocols.
//!
//! Every state, channel and measurement is Gaussian, so each protocol run is
//! simulated as a classical trajectory of quadrature values: vacuum noise,
//! EPR correlations, beam splitters and Alice's displacements all act linearly
//! on jointly Gaussian samples. Sample `i` draws from its own ChaCha8 stream
//! `(seed, i)`, so the output does not depend on the number of threads.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::attacks::AttackParams;
use crate::error::{Error, Result};
use crate::gaussian::LogBase;
use crate::key_rates::exact::{build_network_closed, ExactOptions};
use crate::key_rates::Protocol;
use crate::output::fmt_num;

pub const MIN_SAMPLES: usize = 1000;

/// Per-dimension cap on the empirical information when the residual variance vanishes.
pub const MI_CAP_BITS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub v: f64,
    pub params: AttackParams,
    pub n_samples: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(protocol: Protocol, v: f64, params: AttackParams, n_samples: usize, seed: u64) -> Result<Self> {
        if protocol.is_collective() {
            return Err(Error::InvalidParameter(format!(
                "{protocol} has no classical outcome to simulate; use hom, het, hom2 or het2"
            )));
        }
        if !(v > 1.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("modulation V must exceed 1, got {v}")));
        }
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
        }
        Ok(SimConfig { protocol, v, params, n_samples, seed })
    }

    /// Dimension of `X_A` and `X_B`.
    pub fn dims(&self) -> usize {
        if self.protocol.is_joint() {
            2
        } else {
            1
        }
    }
}

/// One protocol run: Alice's and Bob's variables (second entry unused for homodyne).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub x_a: [f64; 2],
    pub x_b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiEstimate {
    /// Summed over dimensions.
    pub bits: f64,
    pub per_dim: Vec<f64>,
    /// Some dimension hit [`MI_CAP_BITS`].
    pub capped: bool,
    /// Sample variance of each `X_B` component.
    pub var_b: Vec<f64>,
    /// Least-squares residual variance of each `X_B` component given `X_A`.
    pub cond_var_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    pub records: Vec<Record>,
    pub empirical: MiEstimate,
    pub analytic_mi: f64,
    pub analytic_var_b: Vec<f64>,
    pub analytic_cond_var_b: Vec<f64>,
    /// Standard error of the empirical information predicted from the analytic correlations.
    pub sigma_bits: f64,
}

/// Per-sample quadrature generator.
struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Noise(rng)
    }

    fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Vacuum quadratures.
    fn vacuum(&mut self) -> [f64; 2] {
        [self.normal(), self.normal()]
    }

    /// Both modes of `epr_cm(w)`: `Q` correlated, `P` anti-correlated.
    fn epr(&mut self, w: f64) -> ([f64; 2], [f64; 2]) {
        let c = (w * w - 1.0).max(0.0).sqrt();
        let a = (0.5 * (w + c)).sqrt();
        let b = (0.5 * (w - c)).max(0.0).sqrt();
        let (z1, z2, z3, z4) = (self.normal(), self.normal(), self.normal(), self.normal());
        ([a * z1 + b * z2, a * z3 + b * z4], [a * z1 - b * z2, -a * z3 + b * z4])
    }
}

/// Beam splitter `(x, e) -> (sqrt(T) x + sqrt(1-T) e, -sqrt(1-T) x + sqrt(T) e)`.
fn beam_splitter(t: f64, x: [f64; 2], e: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let (s, c) = (t.sqrt(), (1.0 - t).sqrt());
    ([s * x[0] + c * e[0], s * x[1] + c * e[1]], [-c * x[0] + s * e[0], -c * x[1] + s * e[1]])
}

fn sample(config: &SimConfig, index: u64) -> Record {
    let mut rng = Noise::new(config.seed, index);
    let AttackParams { t, w } = config.params;
    let sigma_a = (config.v - 1.0).sqrt();
    let alpha = [sigma_a * rng.normal(), sigma_a * rng.normal()];
    let x_b = match config.protocol {
        Protocol::Hom | Protocol::Het => {
            let vac = rng.vacuum();
            let signal = [vac[0] + alpha[0], vac[1] + alpha[1]];
            let (e, _e2) = rng.epr(w);
            let (b, _eve) = beam_splitter(t, signal, e);
            if config.protocol == Protocol::Hom {
                [b[0], 0.0]
            } else {
                let v0 = rng.vacuum();
                [FRAC_1_SQRT_2 * (b[0] + v0[0]), FRAC_1_SQRT_2 * (b[1] - v0[1])]
            }
        }
        _ => {
            let (b1, c1) = rng.epr(config.v);
            let (e1, _e1b) = rng.epr(w);
            let (e2, _e2b) = rng.epr(w);
            let (c, _) = beam_splitter(t, c1, e1);
            let c = [c[0] + alpha[0], c[1] + alpha[1]];
            let (b2, _) = beam_splitter(t, c, e2);
            if config.protocol == Protocol::Hom2 {
                [b2[0] - t * b1[0], 0.0]
            } else {
                let (v0, v1) = (rng.vacuum(), rng.vacuum());
                let q_minus = FRAC_1_SQRT_2 * (b1[0] - v0[0]);
                let p_plus = FRAC_1_SQRT_2 * (b1[1] + v0[1]);
                let big_q_minus = FRAC_1_SQRT_2 * (b2[0] - v1[0]);
                let big_p_plus = FRAC_1_SQRT_2 * (b2[1] + v1[1]);
                [big_q_minus - t * q_minus, big_p_plus + t * p_plus]
            }
        }
    };
    Record { x_a: alpha, x_b }
}

fn mean_and_var(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Gaussian information `sum_k 1/2 log2(var(X_B,k) / var(X_B,k | X_A))`, with the
/// conditional variance taken from the least-squares residual of `X_B,k` on `X_A`.
pub fn empirical_mi(x_a: &[Vec<f64>], x_b: &[Vec<f64>]) -> Result<MiEstimate> {
    let n = x_a.len();
    if n < MIN_SAMPLES || x_b.len() != n {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} paired samples, got {} and {}",
            n,
            x_b.len()
        )));
    }
    let (pa, pb) = (x_a[0].len(), x_b[0].len());
    if x_a.iter().any(|r| r.len() != pa) || x_b.iter().any(|r| r.len() != pb) {
        return Err(Error::InvalidParameter("ragged sample rows".into()));
    }

    // Centered design matrix; the intercept is absorbed by centering.
    let means_a: Vec<f64> = (0..pa).map(|j| mean_and_var(x_a.iter().map(|r| r[j]), n).0).collect();
    let design = DMatrix::from_fn(n, pa, |i, j| x_a[i][j] - means_a[j]);
    let gram = design.transpose() * &design;
    let chol = gram.clone().cholesky().ok_or(Error::SingularSample)?;
    if gram.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(Error::SingularSample);
    }

    let mut est =
        MiEstimate { bits: 0.0, per_dim: Vec::new(), capped: false, var_b: Vec::new(), cond_var_b: Vec::new() };
    for k in 0..pb {
        let (mean_b, var_b) = mean_and_var(x_b.iter().map(|r| r[k]), n);
        if !(var_b > 0.0) {
            return Err(Error::DegenerateVariance(format!("X_B component {k} has zero sample variance")));
        }
        let y = DVector::from_fn(n, |i, _| x_b[i][k] - mean_b);
        let beta = chol.solve(&(design.transpose() * &y));
        let resid = &y - &design * beta;
        let cond = resid.norm_squared() / (n - 1 - pa) as f64;
        let bits = if cond <= var_b * 2f64.powf(-2.0 * MI_CAP_BITS) {
            est.capped = true;
            MI_CAP_BITS
        } else {
            0.5 * (var_b / cond).log2()
        };
        est.per_dim.push(bits);
        est.bits += bits;
        est.var_b.push(var_b);
        est.cond_var_b.push(cond);
    }
    Ok(est)
}

/// Standard error of [`empirical_mi`] for `n` samples of Gaussian data whose
/// per-dimension information is `per_dim` bits, with `p` regressors.
pub fn mi_standard_error(per_dim: &[f64], n: usize, p: usize) -> f64 {
    let n = n as f64;
    let var: f64 = per_dim
        .iter()
        .map(|&i| {
            let rho2 = 1.0 - 2f64.powf(-2.0 * i);
            (4.0 * rho2 / n + 2.0 * p as f64 / (n * n)) / (2.0 * LN_2).powi(2)
        })
        .sum();
    var.sqrt()
}

pub fn simulate(config: &SimConfig) -> Result<SimRun> {
    let records: Vec<Record> = (0..config.n_samples as u64).into_par_iter().map(|i| sample(config, i)).collect();
    let d = config.dims();
    let x_a: Vec<Vec<f64>> = records.iter().map(|r| r.x_a[..d].to_vec()).collect();
    let x_b: Vec<Vec<f64>> = records.iter().map(|r| r.x_b[..d].to_vec()).collect();
    let empirical = empirical_mi(&x_a, &x_b)?;

    let net = build_network_closed(config.protocol, config.v, &config.params, &ExactOptions::default())?;
    let total = net.model.conditional(&net.bob_outcome, &[])?;
    let cond = net.model.conditional(&net.bob_outcome, &net.alice)?;
    let analytic_var_b: Vec<f64> = (0..d).map(|k| total[(k, k)]).collect();
    let analytic_cond_var_b: Vec<f64> = (0..d).map(|k| cond[(k, k)]).collect();
    let analytic_per_dim: Vec<f64> =
        analytic_var_b.iter().zip(&analytic_cond_var_b).map(|(a, c)| 0.5 * (a / c).log2()).collect();
    let analytic_mi = 0.5 * (total.determinant() / cond.determinant()).log2();
    let sigma_bits = mi_standard_error(&analytic_per_dim, config.n_samples, d);
    Ok(SimRun { config: *config, records, empirical, analytic_mi, analytic_var_b, analytic_cond_var_b, sigma_bits })
}

impl SimRun {
    /// `(empirical - analytic) / sigma`.
    pub fn z_score(&self) -> f64 {
        (self.empirical.bits - self.analytic_mi) / self.sigma_bits
    }

    /// Flat `key=value` lines; information quantities in `base`.
    pub fn summary(&self, base: LogBase) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("protocol", c.protocol.to_string());
        kv("T", fmt_num(c.params.t));
        kv("W", fmt_num(c.params.w));
        kv("N", fmt_num(c.params.excess_noise()));
        kv("V", fmt_num(c.v));
        kv("n", c.n_samples.to_string());
        kv("seed", c.seed.to_string());
        kv("log_base", base.name().to_string());
        kv("empirical_mi", fmt_num(base.from_bits(self.empirical.bits)));
        kv("analytic_mi", fmt_num(base.from_bits(self.analytic_mi)));
        kv("sigma", fmt_num(base.from_bits(self.sigma_bits)));
        kv("z_score", fmt_num(self.z_score()));
        kv("capped", self.empirical.capped.to_string());
        for k in 0..c.dims() {
            kv(&format!("var_xb_{k}_empirical"), fmt_num(self.empirical.var_b[k]));
            kv(&format!("var_xb_{k}_analytic"), fmt_num(self.analytic_var_b[k]));
            kv(&format!("cond_var_xb_{k}_empirical"), fmt_num(self.empirical.cond_var_b[k]));
            kv(&format!("cond_var_xb_{k}_analytic"), fmt_num(self.analytic_cond_var_b[k]));
        }
        out
    }

    /// Raw samples with one column per component of `X_A` and `X_B`.
    pub fn samples_csv(&self) -> String {
        let d = self.config.dims();
        let mut out = String::from(if d == 1 { "x_a,x_b\n" } else { "x_a_q,x_a_p,x_b_q,x_b_p\n" });
        for r in &self.records {
            let fields: Vec<String> = r.x_a[..d].iter().chain(&r.x_b[..d]).map(|&x| fmt_num(x)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(protocol: Protocol, t: f64, w: f64, v: f64, n: usize) -> SimRun {
        let cfg = SimConfig::new(protocol, v, AttackParams::new(t, w).unwrap(), n, 42).unwrap();
        simulate(&cfg).unwrap()
    }

    #[test]
    fn lossless_homodyne() {
        let r = run(Protocol::Hom, 1.0, 1.0, 3.0, 100_000);
        assert!((r.analytic_mi - 0.5 * 3f64.log2()).abs() < 1e-12);
        assert!(r.z_score().abs() < 3.0, "z = {}", r.z_score());
    }

    #[test]
    fn lossless_heterodyne() {
        let r = run(Protocol::Het, 1.0, 1.0, 3.0, 100_000);
        assert!((r.analytic_mi - 1.0).abs() < 1e-12);
        assert!(r.z_score().abs() < 3.0, "z = {}", r.z_score());
    }

    #[test]
    fn hom2_conditional_variance_is_delta_q() {
        let (t, w) = (0.7, 1.5);
        let r = run(Protocol::Hom2, t, w, 1e3, 100_000);
        // Var(dQ) with dQ = sqrt(1-T) (sqrt(T) Q_E1 + Q_E2) and independent ancillas.
        let delta_q = (1.0 - t) * (t * w + w);
        let sigma = delta_q * (2.0 / r.config.n_samples as f64).sqrt();
        assert!((r.empirical.cond_var_b[0] - delta_q).abs() < 5.0 * sigma);
        assert!((r.analytic_cond_var_b[0] - delta_q).abs() < 1e-3);
    }

    #[test]
    fn identical_variables_are_capped() {
        let xs: Vec<Vec<f64>> = (0..2000).map(|i| vec![(i as f64 * 0.37).sin()]).collect();
        let est = empirical_mi(&xs, &xs).unwrap();
        assert!(est.capped);
        assert_eq!(est.bits, MI_CAP_BITS);
    }

    #[test]
    fn independent_variables_give_zero() {
        let mut rng = Noise::new(9, 0);
        let n = 20_000;
        let a: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.normal()]).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.normal()]).collect();
        let est = empirical_mi(&a, &b).unwrap();
        assert!(est.bits.abs() < 3.0 * mi_standard_error(&[0.0], n, 1));
    }

    #[test]
    fn correlated_gaussians_match_closed_form() {
        let rho: f64 = 0.8;
        let mut rng = Noise::new(11, 0);
        let n = 50_000;
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let (x, z) = (rng.normal(), rng.normal());
            a.push(vec![x]);
            b.push(vec![rho * x + (1.0 - rho * rho).sqrt() * z]);
        }
        let exact = -0.5 * (1.0 - rho * rho).log2();
        let est = empirical_mi(&a, &b).unwrap();
        assert!((est.bits - exact).abs() < 3.0 * mi_standard_error(&[exact], n, 1));
    }

    #[test]
    fn too_few_samples_rejected() {
        let p = AttackParams::new(0.5, 1.0).unwrap();
        assert!(SimConfig::new(Protocol::Hom, 10.0, p, 999, 1).is_err());
        assert!(SimConfig::new(Protocol::CollHet, 10.0, p, 5000, 1).is_err());
    }
}
