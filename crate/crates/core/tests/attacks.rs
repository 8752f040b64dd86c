use cvqkd::attacks::*;
use cvqkd::gaussian::{epr_cm, symplectic_eigenvalues, thermal_cm, vacuum_cm};
use cvqkd::tomography::{compose, GaussianChannel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cloner_output_is_physical(t in 0.0f64..=1.0, w in 1.0f64..50.0, v in 1.0f64..1e4) {
        let p = AttackParams::new(t, w).unwrap();
        let out = cloner_output(&p, &thermal_cm(v).unwrap()).unwrap();
        prop_assert!(out.is_physical());
        // Bob's mode sees the lossy-thermal channel.
        let bob = out.reduced(&[0]).unwrap();
        let expected = GaussianChannel::lossy_thermal(t, w).apply_cov(&nalgebra::Matrix2::identity().scale(v));
        prop_assert!((bob.matrix()[(0, 0)] - expected[(0, 0)]).abs() < 1e-9 * v.max(w));
    }

    #[test]
    fn correlated_ancillas_physical_for_admissible_c(t in 0.05f64..0.95, w in 1.0f64..10.0, c in -1.0f64..=1.0) {
        let a = CorrelatedAttackParams::symmetric(AttackParams::new(t, w).unwrap(), c);
        let cm = a.ancilla_cm().unwrap();
        prop_assert!(symplectic_eigenvalues(&cm).unwrap().min() >= 1.0 - 1e-9);
        let ch = correlated_two_mode_channels(&a).unwrap();
        prop_assert!(ch.round_trip.is_completely_positive(1e-9));
    }

    #[test]
    fn deviation_from_composition_is_linear_in_c(t in 0.05f64..0.95, w in 1.01f64..10.0, c in -1.0f64..=1.0) {
        let p = AttackParams::new(t, w).unwrap();
        let ch = correlated_two_mode_channels(&CorrelatedAttackParams::symmetric(p, c)).unwrap();
        let reduced = compose(&ch.forward, &GaussianChannel::identity(), &ch.backward);
        let expected = 2.0 * (t * (1.0 - t) * (1.0 - t)).sqrt() * c.abs() * (w * w - 1.0).sqrt();
        let dev = ch.round_trip.max_abs_diff(&reduced);
        prop_assert!((dev.noise - expected).abs() < 1e-10 * (1.0 + expected));
        prop_assert!(dev.gain < 1e-14);
    }
}

#[test]
fn eve_spectrum_at_large_modulation() {
    let (t, w, v) = (0.7, 2.0, 1e6);
    let p = AttackParams::new(t, w).unwrap();
    let out = cloner_output(&p, &epr_cm(v).unwrap().reduced(&[0]).unwrap()).unwrap();
    let eve = out.reduced(&[1, 2]).unwrap();
    let s = symplectic_eigenvalues(&eve).unwrap();
    assert!((s.values()[0] / ((1.0 - t) * v) - 1.0).abs() < 1e-3, "{:?}", s.values());
    assert!((s.values()[1] / w - 1.0).abs() < 1e-3, "{:?}", s.values());
}

#[test]
fn pure_loss_cloner_on_vacuum_is_vacuum() {
    let p = AttackParams::new(0.4, 1.0).unwrap();
    let out = cloner_output(&p, &vacuum_cm(1)).unwrap();
    assert!((out.reduced(&[0, 1]).unwrap().matrix() - vacuum_cm(2).matrix()).amax() < 1e-12);
}

#[test]
fn beyond_maximal_correlation_rejected() {
    let p = AttackParams::new(0.5, 2.0).unwrap();
    assert!(CorrelatedAttackParams::symmetric(p, 1.2).ancilla_cm().is_err());
    assert!(CorrelatedAttackParams::symmetric(p, -1.01).ancilla_cm().is_err());
}

#[test]
fn asymmetric_paths_have_distinct_channels() {
    let a = CorrelatedAttackParams {
        forward: AttackParams::new(0.8, 1.5).unwrap(),
        backward: AttackParams::new(0.6, 2.5).unwrap(),
        correlation: 0.5,
    };
    let ch = correlated_two_mode_channels(&a).unwrap();
    assert!(ch.forward.max_abs_diff(&ch.backward).norm() > 0.1);
    let enc = ch.round_trip_with_encoding(1.0, -1.0);
    assert!((enc.displacement_offset - nalgebra::Vector2::new(0.6f64.sqrt(), -(0.6f64.sqrt()))).amax() < 1e-15);
}
