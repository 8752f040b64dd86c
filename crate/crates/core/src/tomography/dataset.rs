use std::io::{Read, Write};

use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::GaussianChannel;
use crate::error::{Error, Result};
use crate::output::fmt_num;

pub const MIN_PROBE_SAMPLES: usize = 1000;

/// Gram eigenvalue ratio below which the probe displacements count as affinely dependent.
const RANK_TOL: f64 = 1e-12;

pub const CSV_HEADER: [&str; 9] =
    ["probe_id", "in_q", "in_p", "out_mean_q", "out_mean_p", "out_cov_qq", "out_cov_qp", "out_cov_pp", "n"];

/// Moments measured for one probe state sent through the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRecord {
    pub input: Vector2<f64>,
    pub input_cm: Matrix2<f64>,
    pub output_mean: Vector2<f64>,
    pub output_cm: Matrix2<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    probes: Vec<ProbeRecord>,
}

impl TomographyDataset {
    /// Requires at least three affinely independent input displacements and
    /// at least [`MIN_PROBE_SAMPLES`] samples per probe.
    pub fn new(probes: Vec<ProbeRecord>) -> Result<Self> {
        if let Some(p) = probes.iter().find(|p| p.n < MIN_PROBE_SAMPLES) {
            return Err(Error::InvalidParameter(format!(
                "probe has {} samples, need at least {MIN_PROBE_SAMPLES}",
                p.n
            )));
        }
        let inputs: Vec<Vector2<f64>> = probes.iter().map(|p| p.input).collect();
        check_rank(&inputs)?;
        Ok(Self { probes })
    }

    pub fn probes(&self) -> &[ProbeRecord] {
        &self.probes
    }

    /// CSV with [`CSV_HEADER`]; input CMs are not part of the schema.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for (i, p) in self.probes.iter().enumerate() {
            let nums = [
                p.input[0],
                p.input[1],
                p.output_mean[0],
                p.output_mean[1],
                p.output_cm[(0, 0)],
                p.output_cm[(0, 1)],
                p.output_cm[(1, 1)],
            ];
            let fields: Vec<String> = nums.iter().map(|&x| fmt_num(x)).collect();
            out.push_str(&format!("{i},{},{}\n", fields.join(","), p.n));
        }
        out
    }

    pub fn write_csv(&self, mut sink: impl Write) -> Result<()> {
        sink.write_all(self.to_csv().as_bytes()).map_err(|e| Error::Io(e.to_string()))
    }

    /// Parses the CSV schema. Probe inputs are taken to be coherent states, so
    /// every input CM is the vacuum.
    pub fn read_csv(source: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let headers = reader.headers().map_err(csv_error)?.clone();
        let index = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
        };
        let cols: Vec<usize> = CSV_HEADER.iter().map(|h| index(h)).collect::<Result<_>>()?;
        let mut probes = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(csv_error)?;
            let num = |k: usize| -> Result<f64> {
                let field = &record[cols[k]];
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: `{field}` in {} is not a number", line + 1, CSV_HEADER[k]))
                })
            };
            let n_field = &record[cols[8]];
            let n = n_field
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("row {}: sample count `{n_field}` is not an integer", line + 1)))?;
            let (qq, qp, pp) = (num(5)?, num(6)?, num(7)?);
            probes.push(ProbeRecord {
                input: Vector2::new(num(1)?, num(2)?),
                input_cm: Matrix2::identity(),
                output_mean: Vector2::new(num(3)?, num(4)?),
                output_cm: Matrix2::new(qq, qp, qp, pp),
                n,
            });
        }
        Self::new(probes)
    }

    /// Sends coherent probes displaced by `inputs` through `channel` and records
    /// the sample moments of `n` output quadrature draws per probe.
    /// Probe `i` draws from ChaCha8 stream `(seed, i)`.
    pub fn synthetic(channel: &GaussianChannel, inputs: &[Vector2<f64>], n: usize, seed: u64) -> Result<Self> {
        let input_cm = Matrix2::identity();
        let cov = channel.apply_cov(&input_cm);
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("output covariance is not positive definite".into()))?;
        let l = chol.l();
        let probes = inputs
            .par_iter()
            .enumerate()
            .map(|(i, d)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let mean = channel.apply_mean(d);
                let samples: Vec<Vector2<f64>> = (0..n)
                    .map(|_| {
                        let z = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                        mean + l * z
                    })
                    .collect();
                let (m, c) = sample_moments(&samples);
                ProbeRecord { input: *d, input_cm, output_mean: m, output_cm: c, n }
            })
            .collect();
        Self::new(probes)
    }
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(e.to_string())
    } else {
        Error::Parse(e.to_string())
    }
}

fn sample_moments(xs: &[Vector2<f64>]) -> (Vector2<f64>, Matrix2<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<Vector2<f64>>() / n;
    let cov = xs.iter().map(|x| (x - mean) * (x - mean).transpose()).sum::<Matrix2<f64>>() / (n - 1.0);
    (mean, cov)
}

/// Errors unless the rows `[q, p, 1]` span three dimensions.
pub(crate) fn check_rank(inputs: &[Vector2<f64>]) -> Result<()> {
    if inputs.len() < 3 {
        return Err(Error::RankDeficient(format!("{} probes, need at least 3", inputs.len())));
    }
    let gram: Matrix3<f64> = inputs
        .iter()
        .map(|d| {
            let row = nalgebra::Vector3::new(d[0], d[1], 1.0);
            row * row.transpose()
        })
        .sum();
    let sv = gram.symmetric_eigenvalues();
    let (min, max) = (sv.min(), sv.max());
    if !(min > RANK_TOL * max) {
        return Err(Error::RankDeficient("input displacements are affinely dependent".into()));
    }
    Ok(())
}

/// Default probe set: vacuum plus three displaced coherent states.
pub fn default_probe_inputs() -> Vec<Vector2<f64>> {
    vec![Vector2::new(0.0, 0.0), Vector2::new(3.0, 0.0), Vector2::new(0.0, 3.0), Vector2::new(-3.0, -3.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_probes_rejected() {
        let inputs = vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0), Vector2::new(2.0, 2.0)];
        let r = TomographyDataset::synthetic(&GaussianChannel::identity(), &inputs, 1000, 1);
        assert!(matches!(r, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn small_sample_rejected() {
        let r = TomographyDataset::synthetic(&GaussianChannel::identity(), &default_probe_inputs(), 999, 1);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn csv_round_trip() {
        let ch = GaussianChannel::lossy_thermal(0.7, 2.0);
        let ds = TomographyDataset::synthetic(&ch, &default_probe_inputs(), 2000, 3).unwrap();
        let back = TomographyDataset::read_csv(ds.to_csv().as_bytes()).unwrap();
        assert_eq!(back.to_csv(), ds.to_csv());
        for (a, b) in ds.probes().iter().zip(back.probes()) {
            assert!((a.output_cm - b.output_cm).amax() < 1e-10);
            assert_eq!(a.n, b.n);
        }
    }

    #[test]
    fn csv_errors() {
        let missing = "probe_id,in_q\n0,1\n";
        assert!(matches!(TomographyDataset::read_csv(missing.as_bytes()), Err(Error::Parse(_))));
        let bad = format!("{}\n0,0,0,0,0,1,0,1,abc\n", CSV_HEADER.join(","));
        assert!(matches!(TomographyDataset::read_csv(bad.as_bytes()), Err(Error::Parse(_))));
    }
}
