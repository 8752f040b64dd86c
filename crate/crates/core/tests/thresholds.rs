use cvqkd::attacks::{w_from_excess, AttackParams};
use cvqkd::key_rates::{Protocol, ProtocolRegistry, Reconciliation};
use cvqkd::thresholds::*;

const DR: Reconciliation = Reconciliation::Direct;
const RR: Reconciliation = Reconciliation::Reverse;

#[test]
fn bundle_curves_are_complete_and_nondecreasing() {
    let grid = Grid::new(0.02, 0.98, 97).unwrap();
    for recon in [DR, RR] {
        let bundle = figure_bundle(recon, &grid, ThresholdMethod::Asymptotic).unwrap();
        assert_eq!(bundle.curves.len(), bundle_protocols(recon).len());
        for c in &bundle.curves {
            let failures: Vec<_> = c.failures().collect();
            assert!(failures.is_empty(), "{} {recon}: {failures:?}", c.protocol);
            let v = c.values();
            assert!(v.iter().all(|&n| n >= 0.0));
            for w in v.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{} {recon} decreases: {w:?}", c.protocol);
            }
        }
        let csv = bundle.to_csv();
        assert_eq!(csv.lines().count(), 98);
    }
}

#[test]
fn rr_thresholds_positive_everywhere() {
    let grid = Grid::new(0.02, 0.98, 49).unwrap();
    for p in bundle_protocols(RR) {
        let c = sweep_curve(*p, RR, &grid, ThresholdMethod::Asymptotic).unwrap();
        assert!(c.values().iter().all(|&n| n > 0.0), "{p}");
    }
}

#[test]
fn root_zeroes_the_rate() {
    let registry = ProtocolRegistry::default();
    for (p, recon, t) in
        [(Protocol::Het2, RR, 0.4), (Protocol::Hom2, DR, 0.8), (Protocol::Het, RR, 0.9), (Protocol::CollHet, DR, 0.7)]
    {
        let s = registry.for_protocol(p).unwrap();
        let n = solve_threshold(p, recon, t, ThresholdMethod::Asymptotic).unwrap();
        let w = w_from_excess(t, n).unwrap();
        let rate = |w: f64| s.asymptotic(recon, &AttackParams::new(t, w).unwrap()).unwrap().bits();
        assert!(rate(w * (1.0 - 1e-6)) > 0.0 && rate(w * (1.0 + 1e-6)) < 0.0, "{p} {recon} T={t}");
    }
}

#[test]
fn exact_thresholds_approach_asymptotic() {
    for (p, recon) in [(Protocol::Hom, DR), (Protocol::Hom2, DR), (Protocol::Het, RR), (Protocol::Hom2, RR)] {
        for t in [0.3f64, 0.75] {
            let asym = solve_threshold(p, recon, t, ThresholdMethod::Asymptotic).unwrap();
            let exact = solve_threshold(p, recon, t, ThresholdMethod::Exact { v: 1e6 }).unwrap();
            assert!((exact - asym).abs() <= 1e-3 * asym.max(1e-3), "{p} {recon} T={t}: {exact} vs {asym}");
        }
    }
}

#[test]
fn hom_dr_crossover_near_0_86() {
    let grid = Grid::new(0.02, 0.98, 97).unwrap();
    let one = sweep_curve(Protocol::Hom, DR, &grid, ThresholdMethod::Asymptotic).unwrap();
    let two = sweep_curve(Protocol::Hom2, DR, &grid, ThresholdMethod::Asymptotic).unwrap();
    let tc = crossover(&two, &one).unwrap();
    assert_eq!(tc.len(), 1);
    assert!((tc[0] - 0.86).abs() < 0.01);
    let report = superadditivity_report(&one, &two).unwrap();
    assert!(!report.improved_everywhere() && !report.no_improvement());
    assert!(report.summary().contains("verdict=improved_partially"));
}

#[test]
fn sweep_is_thread_count_independent() {
    let grid = Grid::new(0.1, 0.9, 17).unwrap();
    let run = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| sweep_curve(Protocol::Het2, RR, &grid, ThresholdMethod::Asymptotic).unwrap().to_csv())
    };
    assert_eq!(run(1), run(3));
}
