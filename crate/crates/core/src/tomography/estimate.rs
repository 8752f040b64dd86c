use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::dataset::{check_rank, TomographyDataset};
use super::GaussianChannel;
use crate::error::{Error, Result};

/// Complete-positivity violations are tolerated up to this many standard errors.
pub const CP_SIGMAS: f64 = 5.0;

/// A fitted channel with one standard error per parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEstimate {
    pub channel: GaussianChannel,
    pub gain_se: Matrix2<f64>,
    pub noise_se: Matrix2<f64>,
    pub offset_se: Vector2<f64>,
}

impl ChannelEstimate {
    /// A channel known without statistical error.
    pub fn exact(channel: GaussianChannel) -> Self {
        Self { channel, gain_se: Matrix2::zeros(), noise_se: Matrix2::zeros(), offset_se: Vector2::zeros() }
    }
}

/// Fits `out_mean = gain in + offset` by weighted least squares, one output
/// quadrature at a time with weights `n / out_var`, then averages the residual
/// noise `out_cm - gain in_cm gain^T` over probes with weights `n`.
pub fn estimate_channel(data: &TomographyDataset) -> Result<ChannelEstimate> {
    let probes = data.probes();
    check_rank(&probes.iter().map(|p| p.input).collect::<Vec<_>>())?;

    let mut gain = Matrix2::zeros();
    let mut offset = Vector2::zeros();
    let mut gain_se = Matrix2::zeros();
    let mut offset_se = Vector2::zeros();
    for k in 0..2 {
        let mut normal = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for p in probes {
            let var = p.output_cm[(k, k)];
            if !(var > 0.0) {
                return Err(Error::InvalidParameter(format!("output variance {var} is not positive")));
            }
            let w = p.n as f64 / var;
            let x = Vector3::new(p.input[0], p.input[1], 1.0);
            normal += w * x * x.transpose();
            rhs += w * p.output_mean[k] * x;
        }
        let inv = normal.try_inverse().ok_or_else(|| Error::RankDeficient("normal equations are singular".into()))?;
        let beta = inv * rhs;
        gain[(k, 0)] = beta[0];
        gain[(k, 1)] = beta[1];
        offset[k] = beta[2];
        gain_se[(k, 0)] = inv[(0, 0)].sqrt();
        gain_se[(k, 1)] = inv[(1, 1)].sqrt();
        offset_se[k] = inv[(2, 2)].sqrt();
    }

    let total: f64 = probes.iter().map(|p| p.n as f64).sum();
    let mut noise = Matrix2::zeros();
    let mut cm_in = Matrix2::zeros();
    let mut var_sample = Matrix2::zeros();
    for p in probes {
        let w = p.n as f64 / total;
        noise += w * (p.output_cm - gain * p.input_cm * gain.transpose());
        cm_in += w * p.input_cm;
        let s = &p.output_cm;
        // Wishart variance of a sample covariance entry.
        var_sample += Matrix2::from_fn(|i, j| w * w * (s[(i, i)] * s[(j, j)] + s[(i, j)].powi(2)) / (p.n as f64 - 1.0));
    }
    noise = (noise + noise.transpose()) * 0.5;

    // First-order propagation of the gain error into gain cm_in gain^T.
    let c_gt = cm_in * gain.transpose();
    let g_c = gain * cm_in;
    let noise_se = Matrix2::from_fn(|j, k| {
        let mut var = var_sample[(j, k)];
        for a in 0..2 {
            for b in 0..2 {
                let d = if j == a { c_gt[(b, k)] } else { 0.0 } + if k == a { g_c[(j, b)] } else { 0.0 };
                var += (d * gain_se[(a, b)]).powi(2);
            }
        }
        var.sqrt()
    });

    let channel = GaussianChannel::from_parts(gain, noise, offset);
    let allowed = CP_SIGMAS * (noise_se.amax() + 2.0 * gain.amax() * gain_se.amax());
    let min_eig = channel.cp_min_eigenvalue();
    if min_eig < -allowed {
        return Err(Error::NotCompletelyPositive { min_eig, allowed });
    }
    Ok(ChannelEstimate { channel, gain_se, noise_se, offset_se })
}
