//! Security thresholds: the largest tolerable excess noise `N` at each
//! transmission `T`, found as the root of the rate in `W`.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::attacks::{excess_noise, AttackParams};
use crate::error::{Error, Result};
use crate::key_rates::exact::ExactOptions;
use crate::key_rates::{KeyRateProtocol, Protocol, ProtocolRegistry, Reconciliation};
use crate::output::fmt_num;

/// Which rate the threshold is a root of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    Asymptotic,
    /// Exact engine at modulation `v`.
    Exact {
        v: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bisection stops once the `W` bracket is narrower than this.
    pub w_tol: f64,
    /// Bracket expansion gives up beyond this `W`.
    pub w_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { w_tol: 1e-10, w_max: 1e6 }
    }
}

/// Rates extracted from numeric spectra are smooth only to about this many bits.
const MONOTONE_SLACK: f64 = 1e-8;

fn rate_at(
    strategy: &dyn KeyRateProtocol,
    recon: Reconciliation,
    t: f64,
    w: f64,
    method: ThresholdMethod,
) -> Result<f64> {
    let params = AttackParams::new(t, w)?;
    let r = match method {
        ThresholdMethod::Asymptotic => strategy.asymptotic(recon, &params)?,
        ThresholdMethod::Exact { v } => strategy.exact(recon, v, &params, &ExactOptions::default())?,
    };
    Ok(r.bits())
}

/// Root `W` of the rate at fixed `T`; `1` when the rate is not positive at `W = 1`.
pub fn solve_threshold_w(
    strategy: &dyn KeyRateProtocol,
    recon: Reconciliation,
    t: f64,
    method: ThresholdMethod,
    opts: &SolverOptions,
) -> Result<f64> {
    strategy.require_supported(recon)?;
    if !(opts.w_tol > 0.0) || !(opts.w_max > 1.0) {
        return Err(Error::InvalidParameter("solver tolerance and W bound must be positive".into()));
    }
    let rate = |w: f64| rate_at(strategy, recon, t, w, method);

    let mut lo = 1.0;
    let mut r_lo = rate(lo)?;
    if r_lo <= 0.0 {
        return Ok(1.0);
    }
    let mut hi = 2.0;
    let mut r_hi = rate(hi)?;
    while r_hi > 0.0 {
        if r_hi > r_lo + MONOTONE_SLACK {
            return Err(Error::NonMonotone { lo, hi });
        }
        if hi >= opts.w_max {
            return Err(Error::NoBracket(opts.w_max));
        }
        lo = hi;
        r_lo = r_hi;
        hi = (2.0 * hi).min(opts.w_max);
        r_hi = rate(hi)?;
    }
    loop {
        let tol = opts.w_tol.max(4.0 * f64::EPSILON * hi);
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r_mid = rate(mid)?;
        if r_mid > r_lo + MONOTONE_SLACK || r_mid < r_hi - MONOTONE_SLACK {
            return Err(Error::NonMonotone { lo, hi });
        }
        if r_mid > 0.0 {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
            r_hi = r_mid;
        }
    }
    // The endpoint whose rate is closer to zero.
    Ok(if r_lo.abs() <= r_hi.abs() { lo } else { hi })
}

/// Tolerable excess noise at transmission `t`.
pub fn solve_threshold(protocol: Protocol, recon: Reconciliation, t: f64, method: ThresholdMethod) -> Result<f64> {
    let registry = ProtocolRegistry::default();
    solve_threshold_in(registry.for_protocol(protocol)?, recon, t, method, &SolverOptions::default())
}

pub fn solve_threshold_in(
    strategy: &dyn KeyRateProtocol,
    recon: Reconciliation,
    t: f64,
    method: ThresholdMethod,
    opts: &SolverOptions,
) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("transmission must lie in (0, 1), got {t}")));
    }
    let w = solve_threshold_w(strategy, recon, t, method, opts)?;
    Ok(excess_noise(&AttackParams::new(t, w)?))
}

/// Evenly spaced transmissions `lo..=hi` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { lo: 0.02, hi: 0.98, steps: 193 }
    }
}

impl Grid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return Err(Error::InvalidParameter(format!("grid must satisfy 0 < lo <= hi < 1, got {lo}:{hi}")));
        }
        if steps > 1 && lo == hi {
            return Err(Error::InvalidParameter("grid with several points needs lo < hi".into()));
        }
        Ok(Grid { lo, hi, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => {
                let h = (self.hi - self.lo) / (n - 1) as f64;
                (0..n).map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 }).collect()
            }
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// `lo:hi:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("grid must be lo:hi:steps, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Grid::new(lo, hi, steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPoint {
    pub t: f64,
    pub n: Result<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub protocol: Protocol,
    pub reconciliation: Reconciliation,
    pub method: ThresholdMethod,
    pub grid: Grid,
    pub points: Vec<ThresholdPoint>,
}

impl ThresholdCurve {
    /// Thresholds with failed points as `NaN`.
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| *p.n.as_ref().unwrap_or(&f64::NAN)).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.points.iter().filter_map(|p| p.n.as_ref().err().map(|e| (p.t, e)))
    }

    /// `T,N` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,N\n");
        for (p, n) in self.points.iter().zip(self.values()) {
            let _ = writeln!(out, "{},{}", fmt_num(p.t), fmt_num(n));
        }
        out
    }
}

pub fn sweep_curve(
    protocol: Protocol,
    recon: Reconciliation,
    grid: &Grid,
    method: ThresholdMethod,
) -> Result<ThresholdCurve> {
    let registry = ProtocolRegistry::default();
    sweep_curve_in(registry.for_protocol(protocol)?, recon, grid, method, &SolverOptions::default())
}

/// One solve per grid point, in parallel; per-point failures are kept in the curve.
pub fn sweep_curve_in(
    strategy: &dyn KeyRateProtocol,
    recon: Reconciliation,
    grid: &Grid,
    method: ThresholdMethod,
    opts: &SolverOptions,
) -> Result<ThresholdCurve> {
    strategy.require_supported(recon)?;
    let points = grid
        .points()
        .into_par_iter()
        .map(|t| ThresholdPoint { t, n: solve_threshold_in(strategy, recon, t, method, opts) })
        .collect();
    Ok(ThresholdCurve { protocol: strategy.protocol(), reconciliation: recon, method, grid: *grid, points })
}

fn check_same_grid(a: &ThresholdCurve, b: &ThresholdCurve) -> Result<()> {
    if a.grid != b.grid || a.points.len() != b.points.len() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// Transmissions where `a - b` changes sign, refined by bisection to `1e-4` in `T`.
///
/// Points where the curves coincide (typically both zero) carry no sign and are skipped.
pub fn crossover(a: &ThresholdCurve, b: &ThresholdCurve) -> Result<Vec<f64>> {
    check_same_grid(a, b)?;
    let registry = ProtocolRegistry::default();
    let (sa, sb) = (registry.for_protocol(a.protocol)?, registry.for_protocol(b.protocol)?);
    let opts = SolverOptions::default();
    let diff = |t: f64| -> Result<f64> {
        Ok(solve_threshold_in(sa, a.reconciliation, t, a.method, &opts)?
            - solve_threshold_in(sb, b.reconciliation, t, b.method, &opts)?)
    };

    let signed: Vec<(f64, f64)> = a
        .points
        .iter()
        .zip(&b.points)
        .filter_map(|(pa, pb)| match (&pa.n, &pb.n) {
            (Ok(x), Ok(y)) if x != y => Some((pa.t, x - y)),
            _ => None,
        })
        .collect();

    let mut out = Vec::new();
    for pair in signed.windows(2) {
        let ((mut lo, d_lo), (mut hi, d_hi)) = (pair[0], pair[1]);
        if d_lo.signum() == d_hi.signum() {
            continue;
        }
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            let d = diff(mid)?;
            if d.signum() == d_lo.signum() && d != 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    TwoWayBetter,
    OneWayBetter,
    /// Equal positive thresholds.
    Equal,
    /// Neither protocol is secure even at zero excess noise.
    BothInsecure,
    /// At least one solve failed.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperadditivityReport {
    pub one_way: (Protocol, Reconciliation),
    pub two_way: (Protocol, Reconciliation),
    pub classes: Vec<(f64, Dominance)>,
    pub crossovers: Vec<f64>,
}

impl SuperadditivityReport {
    pub fn count(&self, d: Dominance) -> usize {
        self.classes.iter().filter(|(_, c)| *c == d).count()
    }

    /// Two-way strictly better at every point where either protocol is secure.
    pub fn improved_everywhere(&self) -> bool {
        self.classes.iter().all(|(_, c)| matches!(c, Dominance::TwoWayBetter | Dominance::BothInsecure))
            && self.count(Dominance::TwoWayBetter) > 0
    }

    pub fn no_improvement(&self) -> bool {
        self.count(Dominance::TwoWayBetter) == 0
    }

    pub fn summary(&self) -> String {
        let verdict = if self.improved_everywhere() {
            "improved_everywhere"
        } else if self.no_improvement() {
            "no_improvement"
        } else {
            "improved_partially"
        };
        let crossings: Vec<String> = self.crossovers.iter().map(|&t| fmt_num(t)).collect();
        format!(
            "one_way={} two_way={} recon={} verdict={} two_way_better={} one_way_better={} equal={} both_insecure={} failed={} crossovers={}",
            self.one_way.0,
            self.two_way.0,
            self.two_way.1,
            verdict,
            self.count(Dominance::TwoWayBetter),
            self.count(Dominance::OneWayBetter),
            self.count(Dominance::Equal),
            self.count(Dominance::BothInsecure),
            self.count(Dominance::Failed),
            crossings.join(";"),
        )
    }
}

pub fn superadditivity_report(one_way: &ThresholdCurve, two_way: &ThresholdCurve) -> Result<SuperadditivityReport> {
    check_same_grid(one_way, two_way)?;
    let classes = one_way
        .points
        .iter()
        .zip(&two_way.points)
        .map(|(a, b)| {
            let class = match (&a.n, &b.n) {
                (Ok(x), Ok(y)) if *x == 0.0 && *y == 0.0 => Dominance::BothInsecure,
                (Ok(x), Ok(y)) if y > x => Dominance::TwoWayBetter,
                (Ok(x), Ok(y)) if y < x => Dominance::OneWayBetter,
                (Ok(_), Ok(_)) => Dominance::Equal,
                _ => Dominance::Failed,
            };
            (a.t, class)
        })
        .collect();
    Ok(SuperadditivityReport {
        one_way: (one_way.protocol, one_way.reconciliation),
        two_way: (two_way.protocol, two_way.reconciliation),
        classes,
        crossovers: crossover(two_way, one_way)?,
    })
}

/// Protocol columns of the DR and RR comparison figures.
pub fn bundle_protocols(recon: Reconciliation) -> &'static [Protocol] {
    match recon {
        Reconciliation::Direct => &[
            Protocol::Hom,
            Protocol::Het,
            Protocol::CollHet,
            Protocol::Hom2,
            Protocol::Het2,
            Protocol::CollHom2,
            Protocol::CollHet2,
        ],
        Reconciliation::Reverse => &[Protocol::Hom, Protocol::Het, Protocol::Hom2, Protocol::Het2],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureBundle {
    pub reconciliation: Reconciliation,
    pub grid: Grid,
    pub curves: Vec<ThresholdCurve>,
}

impl FigureBundle {
    /// Header `T,<protocol>...`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T");
        for c in &self.curves {
            out.push(',');
            out.push_str(c.protocol.name());
        }
        out.push('\n');
        let columns: Vec<Vec<f64>> = self.curves.iter().map(ThresholdCurve::values).collect();
        for (i, t) in self.grid.points().into_iter().enumerate() {
            out.push_str(&fmt_num(t));
            for col in &columns {
                out.push(',');
                out.push_str(&fmt_num(col[i]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn figure_bundle(recon: Reconciliation, grid: &Grid, method: ThresholdMethod) -> Result<FigureBundle> {
    let curves =
        bundle_protocols(recon).iter().map(|&p| sweep_curve(p, recon, grid, method)).collect::<Result<Vec<_>>>()?;
    Ok(FigureBundle { reconciliation: recon, grid: *grid, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::w_from_excess;

    const DR: Reconciliation = Reconciliation::Direct;
    const RR: Reconciliation = Reconciliation::Reverse;

    #[test]
    fn coll_het_dr_threshold_vanishes_at_half() {
        assert_eq!(solve_threshold(Protocol::CollHet, DR, 0.5, ThresholdMethod::Asymptotic).unwrap(), 0.0);
    }

    #[test]
    fn coll_hom2_dr_threshold_vanishes_at_root() {
        let root = (3.0 - 5f64.sqrt()) / 2.0;
        let n = solve_threshold(Protocol::CollHom2, DR, root, ThresholdMethod::Asymptotic).unwrap();
        assert!(n < 1e-9);
    }

    #[test]
    fn threshold_zeroes_the_rate() {
        let reg = ProtocolRegistry::default();
        for (p, r, t) in [(Protocol::Hom, RR, 0.5), (Protocol::Het2, RR, 0.3), (Protocol::Hom2, DR, 0.8)] {
            let n = solve_threshold(p, r, t, ThresholdMethod::Asymptotic).unwrap();
            assert!(n > 0.0);
            let params = AttackParams::new(t, w_from_excess(t, n).unwrap()).unwrap();
            let rate = reg.for_protocol(p).unwrap().asymptotic(r, &params).unwrap().bits();
            assert!(rate.abs() <= 1e-8, "{p} {r}: {rate}");
        }
    }

    #[test]
    fn hom_rr_threshold_matches_scalar_root() {
        // 1/2 log2(W / (0.5 b1)) = g(W) with b1 = (W + 1) / 2
        let f = |w: f64| 0.5 * (4.0 * w / (w + 1.0)).log2() - crate::gaussian::g_entropy(w).unwrap();
        let (mut lo, mut hi) = (1.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = excess_noise(&AttackParams::new(0.5, lo).unwrap());
        let n = solve_threshold(Protocol::Hom, RR, 0.5, ThresholdMethod::Asymptotic).unwrap();
        assert!((n - expected).abs() < 1e-9);
    }

    #[test]
    fn tolerance_doubling_is_stable() {
        let reg = ProtocolRegistry::default();
        let s = reg.get("het").unwrap();
        let a = solve_threshold_in(s, RR, 0.6, ThresholdMethod::Asymptotic, &SolverOptions::default()).unwrap();
        let loose = SolverOptions { w_tol: 2e-10, ..Default::default() };
        let b = solve_threshold_in(s, RR, 0.6, ThresholdMethod::Asymptotic, &loose).unwrap();
        assert!((a - b).abs() <= 1e-8);
    }

    #[test]
    fn divergent_rr_rejected() {
        let err = sweep_curve(Protocol::CollHom, RR, &Grid::default(), ThresholdMethod::Asymptotic).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.02:0.98:193".parse().unwrap();
        assert_eq!(g, Grid::default());
        let pts = g.points();
        assert_eq!(pts.len(), 193);
        assert!((pts[1] - 0.025).abs() < 1e-15);
        assert_eq!(*pts.last().unwrap(), 0.98);
        assert!("0:1:5".parse::<Grid>().is_err());
        assert!("0.1:0.2".parse::<Grid>().is_err());
        assert!("0.1:0.9:0".parse::<Grid>().unwrap().points().is_empty());
    }

    #[test]
    fn self_crossover_is_empty() {
        let g = Grid::new(0.3, 0.9, 13).unwrap();
        let c = sweep_curve(Protocol::Het, DR, &g, ThresholdMethod::Asymptotic).unwrap();
        assert!(crossover(&c, &c).unwrap().is_empty());
        let r = superadditivity_report(&c, &c).unwrap();
        assert!(r.no_improvement());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = sweep_curve(Protocol::Het, DR, &Grid::new(0.3, 0.9, 5).unwrap(), ThresholdMethod::Asymptotic).unwrap();
        let b = sweep_curve(Protocol::Het2, DR, &Grid::new(0.3, 0.9, 6).unwrap(), ThresholdMethod::Asymptotic).unwrap();
        assert!(matches!(crossover(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn empty_bundle_has_header_only() {
        let g = Grid::new(0.1, 0.9, 0).unwrap();
        let b = figure_bundle(RR, &g, ThresholdMethod::Asymptotic).unwrap();
        assert_eq!(b.to_csv(), "T,hom,het,hom2,het2\n");
    }
}
