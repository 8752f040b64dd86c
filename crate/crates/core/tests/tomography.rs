use cvqkd::attacks::{AttackParams, CorrelatedAttackParams};
use cvqkd::tomography::{
    default_probe_inputs, estimate_channel, GaussianChannel, HybridDatasets, Tolerance, TomographyDataset, Verdict,
};
use nalgebra::Vector2;

fn attack(c: f64) -> CorrelatedAttackParams {
    CorrelatedAttackParams::symmetric(AttackParams::new(0.7, 1.5).unwrap(), c)
}

#[test]
fn discriminates_correlated_attacks() {
    let mut reducible_max: f64 = 0.0;
    let mut irreducible_min = f64::INFINITY;
    for seed in 0..10u64 {
        let r0 = HybridDatasets::synthetic_default(&attack(0.0), 10_000, 100 * seed)
            .unwrap()
            .check(Tolerance::default())
            .unwrap();
        assert_eq!(r0.verdict, Verdict::Reducible, "seed {seed}: {r0:?}");
        reducible_max = reducible_max.max(r0.reducibility.norm());

        let r9 = HybridDatasets::synthetic_default(&attack(0.9), 10_000, 100 * seed + 50)
            .unwrap()
            .check(Tolerance::default())
            .unwrap();
        assert!(matches!(r9.verdict, Verdict::Irreducible(_)), "seed {seed}: {r9:?}");
        irreducible_min = irreducible_min.min(r9.reducibility.norm());
    }
    eprintln!("c=0 max {reducible_max}, c=0.9 min {irreducible_min}");
    assert!(irreducible_min >= 10.0 * reducible_max);
}

#[test]
fn uncorrelated_deviation_within_noise_floor() {
    for seed in 0..5u64 {
        let r = HybridDatasets::synthetic_default(&attack(0.0), 10_000, seed)
            .unwrap()
            .check(Tolerance::Sigmas(3.0))
            .unwrap();
        assert_eq!(r.verdict, Verdict::Reducible, "seed {seed}: {r:?}");
    }
}

#[test]
fn asymmetric_paths_detected() {
    let a = CorrelatedAttackParams {
        forward: AttackParams::new(0.7, 1.5).unwrap(),
        backward: AttackParams::new(0.5, 1.5).unwrap(),
        correlation: 0.0,
    };
    let r = HybridDatasets::synthetic_default(&a, 10_000, 7).unwrap().check(Tolerance::default()).unwrap();
    assert!(matches!(r.verdict, Verdict::Asymmetric(_)), "{r:?}");
}

#[test]
fn verdict_independent_of_probe_set() {
    let other = vec![Vector2::new(1.0, 1.0), Vector2::new(-2.0, 1.0), Vector2::new(1.0, -2.5), Vector2::new(4.0, 0.5)];
    for c in [0.0, 0.9] {
        let a = HybridDatasets::synthetic(&attack(c), &default_probe_inputs(), 10_000, 1).unwrap();
        let b = HybridDatasets::synthetic(&attack(c), &other, 10_000, 1).unwrap();
        let (ra, rb) = (a.check(Tolerance::default()).unwrap(), b.check(Tolerance::default()).unwrap());
        assert_eq!(ra.verdict.name(), rb.verdict.name());
    }
}

#[test]
fn estimation_error_scales_as_inverse_sqrt_n() {
    let ch = GaussianChannel::lossy_thermal(0.7, 2.0);
    let rms = |n: usize| {
        let mut sum = 0.0;
        let reps = 20;
        for seed in 0..reps {
            let ds = TomographyDataset::synthetic(&ch, &default_probe_inputs(), n, seed).unwrap();
            let est = estimate_channel(&ds).unwrap();
            sum += (est.channel.noise - ch.noise).norm_squared() + (est.channel.gain - ch.gain).norm_squared();
        }
        (sum / reps as f64).sqrt()
    };
    let errors: Vec<f64> = [1_000, 10_000, 100_000].into_iter().map(rms).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        // sqrt(10) = 3.16 in expectation.
        assert!((2.0..5.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn standard_errors_are_calibrated() {
    let ch = GaussianChannel::lossy_thermal(0.6, 1.8);
    let mut z2 = 0.0;
    let mut count = 0.0;
    for seed in 0..40 {
        let ds = TomographyDataset::synthetic(&ch, &default_probe_inputs(), 5_000, seed).unwrap();
        let est = estimate_channel(&ds).unwrap();
        for i in 0..2 {
            z2 += ((est.channel.gain[(i, i)] - ch.gain[(i, i)]) / est.gain_se[(i, i)]).powi(2);
            z2 += ((est.channel.noise[(i, i)] - ch.noise[(i, i)]) / est.noise_se[(i, i)]).powi(2);
            count += 2.0;
        }
    }
    let mean_z2 = z2 / count;
    assert!((0.6..1.5).contains(&mean_z2), "mean z^2 = {mean_z2}");
}

#[test]
fn report_key_value() {
    let r = HybridDatasets::synthetic_default(&attack(0.9), 10_000, 3).unwrap().check(Tolerance::default()).unwrap();
    let text = r.to_key_value();
    assert!(text.starts_with("verdict=Irreducible\n"));
    assert!(text.contains("reducibility_deviation="));
}
