//! Gaussian-channel tomography from first and second moments, and the
//! reducibility test for two-path attacks on the hybrid protocol.

mod channel;
mod dataset;
mod estimate;
mod reducibility;

pub use channel::{compose, ChannelDeviation, GaussianChannel};
pub use dataset::{default_probe_inputs, ProbeRecord, TomographyDataset, CSV_HEADER, MIN_PROBE_SAMPLES};
pub use estimate::{estimate_channel, ChannelEstimate, CP_SIGMAS};
pub use reducibility::{check_reducibility, HybridDatasets, ReducibilityReport, Tolerance, Verdict};
