mod args;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use cvqkd::attacks::{w_from_excess, AttackParams, CorrelatedAttackParams};
use cvqkd::gaussian::LogBase;
use cvqkd::key_rates::exact::ExactOptions;
use cvqkd::key_rates::{KeyRateProtocol, Protocol, ProtocolRegistry, Rate, Reconciliation};
use cvqkd::output::fmt_num;
use cvqkd::simulator::{simulate, SimConfig};
use cvqkd::thresholds::{
    crossover, figure_bundle, solve_threshold_in, sweep_curve_in, Grid, SolverOptions, ThresholdMethod,
};
use cvqkd::tomography::{HybridDatasets, Tolerance, TomographyDataset};
use cvqkd::Error;

use args::{BundleArgs, Cli, Command, NoiseArgs, RateArgs, SimulateArgs, SweepArgs, ThresholdArgs, TomoArgs};

const EXIT_FLAGS: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

/// A failure with its exit code and a short machine-readable kind.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn flags(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FLAGS, kind: "flag", message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_IO, kind: "io", message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidParameter(_) => (EXIT_FLAGS, "invalid_parameter"),
            Error::Unsupported { .. } => (EXIT_FLAGS, "unsupported"),
            Error::UnknownProtocol(_) => (EXIT_FLAGS, "unknown_protocol"),
            Error::Parse(_) => (EXIT_FLAGS, "parse"),
            Error::GridMismatch(_) => (EXIT_FLAGS, "grid_mismatch"),
            Error::Io(_) => (EXIT_IO, "io"),
            Error::NonMonotone { .. } => (EXIT_NUMERIC, "non_monotone"),
            Error::NoBracket(_) => (EXIT_NUMERIC, "no_bracket"),
            Error::Extraction(_) => (EXIT_NUMERIC, "extraction"),
            Error::RankDeficient(_) => (EXIT_NUMERIC, "rank_deficient"),
            Error::NotCompletelyPositive { .. } => (EXIT_NUMERIC, "not_completely_positive"),
            Error::SingularSample => (EXIT_NUMERIC, "singular_sample"),
            Error::DegenerateVariance(_) => (EXIT_NUMERIC, "degenerate_variance"),
            _ => (EXIT_NUMERIC, "numeric"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Output text plus an optional failure to report after writing it.
struct Outcome {
    text: String,
    failure: Option<Failure>,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Outcome { text, failure: None }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            return report(&Failure::flags(message.join(" ").trim_start_matches("error: ")));
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> ExitCode {
    let message = f.message.replace('\n', " ");
    eprintln!("error kind={} exit={} message={}", f.kind, f.code, message);
    ExitCode::from(f.code)
}

fn run(cli: &Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::flags(format!("thread pool: {e}")))?;
    }
    let base = LogBase::parse(&cli.log_base).ok_or_else(|| Failure::flags("log base must be 2 or e"))?;
    let registry = ProtocolRegistry::default();
    let outcome = match &cli.command {
        Command::Rate(a) => rate(&registry, a, base)?.into(),
        Command::Threshold(a) => threshold(&registry, a)?.into(),
        Command::Sweep(a) => sweep(&registry, a)?,
        Command::FigureBundle(a) => bundle(a)?,
        Command::Simulate(a) => simulate_cmd(a, base)?.into(),
        Command::TomoCheck(a) => tomo_check(a)?.into(),
    };
    match &cli.out {
        Some(path) => fs::write(path, &outcome.text).map_err(|e| Failure::io(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
        }
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn attack(noise: &NoiseArgs) -> CliResult<AttackParams> {
    let w = match (noise.w, noise.n_excess) {
        (Some(w), None) => w,
        (None, Some(n)) => w_from_excess(noise.t, n)?,
        _ => return Err(Failure::flags("exactly one of --W and --N is required")),
    };
    Ok(AttackParams::new(noise.t, w)?)
}

fn method(v: Option<f64>) -> ThresholdMethod {
    v.map_or(ThresholdMethod::Asymptotic, |v| ThresholdMethod::Exact { v })
}

fn strategy<'a>(registry: &'a ProtocolRegistry, name: &str) -> CliResult<&'a dyn KeyRateProtocol> {
    Ok(registry.get(name)?)
}

fn recon(s: &str) -> CliResult<Reconciliation> {
    Ok(s.parse::<Reconciliation>()?)
}

fn grid(s: &str) -> CliResult<Grid> {
    Ok(s.parse::<Grid>()?)
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn rate(registry: &ProtocolRegistry, a: &RateArgs, base: LogBase) -> CliResult<String> {
    let s = strategy(registry, &a.protocol.protocol)?;
    let r = recon(&a.protocol.recon)?;
    s.require_supported(r)?;
    let params = attack(&a.noise)?;
    let result = match a.v {
        None => s.asymptotic(r, &params)?,
        Some(v) => s.exact(r, v, &params, &ExactOptions::default())?,
    };
    let mut out = String::new();
    kv(&mut out, "protocol", s.name());
    kv(&mut out, "recon", r);
    kv(&mut out, "method", result.method.name());
    kv(&mut out, "T", fmt_num(params.t));
    kv(&mut out, "W", fmt_num(params.w));
    kv(&mut out, "N", fmt_num(params.excess_noise()));
    if let Some(v) = result.modulation {
        kv(&mut out, "V", fmt_num(v));
    }
    kv(&mut out, "log_base", base.name());
    let value = match result.rate.in_base(base) {
        Rate::Finite(x) => fmt_num(x),
        Rate::NegInfinity => "-inf".to_string(),
    };
    kv(&mut out, "rate", value);
    Ok(out)
}

fn threshold(registry: &ProtocolRegistry, a: &ThresholdArgs) -> CliResult<String> {
    let s = strategy(registry, &a.protocol.protocol)?;
    let r = recon(&a.protocol.recon)?;
    let n = solve_threshold_in(s, r, a.t, method(a.v), &SolverOptions::default())?;
    let mut out = String::new();
    kv(&mut out, "protocol", s.name());
    kv(&mut out, "recon", r);
    kv(&mut out, "method", if a.v.is_some() { "exact" } else { "asymptotic" });
    if let Some(v) = a.v {
        kv(&mut out, "V", fmt_num(v));
    }
    kv(&mut out, "T", fmt_num(a.t));
    kv(&mut out, "N", fmt_num(n));
    Ok(out)
}

/// The one-way protocol for a two-way one and vice versa.
fn counterpart(p: Protocol) -> Protocol {
    match p {
        Protocol::Hom => Protocol::Hom2,
        Protocol::Het => Protocol::Het2,
        Protocol::CollHom => Protocol::CollHom2,
        Protocol::CollHet => Protocol::CollHet2,
        Protocol::Hom2 => Protocol::Hom,
        Protocol::Het2 => Protocol::Het,
        Protocol::CollHom2 => Protocol::CollHom,
        Protocol::CollHet2 => Protocol::CollHet,
    }
}

fn first_failure<'a>(curves: impl IntoIterator<Item = &'a cvqkd::thresholds::ThresholdCurve>) -> Option<Failure> {
    curves.into_iter().find_map(|c| {
        c.failures().next().map(|(t, e)| {
            let mut f = Failure::from(e.clone());
            f.message = format!("{} at T={}: {}", c.protocol, fmt_num(t), f.message);
            f
        })
    })
}

/// CSV `T,<protocol>,<counterpart>` followed by a `# crossovers=` line when the
/// counterpart is defined for this direction.
fn sweep(registry: &ProtocolRegistry, a: &SweepArgs) -> CliResult<Outcome> {
    let s = strategy(registry, &a.protocol.protocol)?;
    let r = recon(&a.protocol.recon)?;
    let g = grid(&a.grid)?;
    let m = method(a.v);
    let opts = SolverOptions::default();
    let main = sweep_curve_in(s, r, &g, m, &opts)?;
    let other_strategy = registry.for_protocol(counterpart(s.protocol()))?;
    let other = match other_strategy.require_supported(r) {
        Ok(()) => Some(sweep_curve_in(other_strategy, r, &g, m, &opts)?),
        Err(_) => None,
    };

    let mut text = format!("T,{}", main.protocol);
    if let Some(o) = &other {
        let _ = write!(text, ",{}", o.protocol);
    }
    text.push('\n');
    let other_values = other.as_ref().map(|o| o.values());
    for (i, (t, n)) in g.points().into_iter().zip(main.values()).enumerate() {
        let _ = write!(text, "{},{}", fmt_num(t), fmt_num(n));
        if let Some(ov) = &other_values {
            let _ = write!(text, ",{}", fmt_num(ov[i]));
        }
        text.push('\n');
    }
    if let Some(o) = &other {
        let crossings: Vec<String> = crossover(&main, o)?.into_iter().map(fmt_num).collect();
        let _ = writeln!(text, "# crossovers={}", crossings.join(";"));
    }
    let failure = first_failure(std::iter::once(&main).chain(other.as_ref()));
    Ok(Outcome { text, failure })
}

fn bundle(a: &BundleArgs) -> CliResult<Outcome> {
    let b = figure_bundle(recon(&a.recon)?, &grid(&a.grid)?, method(a.v))?;
    let failure = first_failure(&b.curves);
    Ok(Outcome { text: b.to_csv(), failure })
}

fn simulate_cmd(a: &SimulateArgs, base: LogBase) -> CliResult<String> {
    let protocol: Protocol = a.protocol.parse()?;
    let config = SimConfig::new(protocol, a.v, attack(&a.noise)?, a.n, a.seed)?;
    let run = simulate(&config)?;
    if let Some(path) = &a.samples {
        fs::write(path, run.samples_csv()).map_err(|e| Failure::io(path, e))?;
    }
    Ok(run.summary(base))
}

fn read_dataset(path: &Path) -> CliResult<TomographyDataset> {
    let file = fs::File::open(path).map_err(|e| Failure::io(path, e))?;
    TomographyDataset::read_csv(file).map_err(|e| match e {
        Error::Io(_) | Error::Parse(_) => Failure::io(path, e),
        other => other.into(),
    })
}

fn tomo_check(a: &TomoArgs) -> CliResult<String> {
    let tol = match (a.tol, a.sigmas) {
        (Some(x), _) => Tolerance::Fixed(x),
        (None, Some(k)) => Tolerance::Sigmas(k),
        (None, None) => Tolerance::default(),
    };
    let data = match (&a.forward, &a.backward, &a.round_trip) {
        (Some(f), Some(b), Some(r)) => {
            HybridDatasets { forward: read_dataset(f)?, backward: read_dataset(b)?, round_trip: read_dataset(r)? }
        }
        _ => {
            let c = a.correlation.ok_or_else(|| Failure::flags("--correlation or all three dataset paths required"))?;
            let t = a.t.ok_or_else(|| Failure::flags("--T is required for synthetic data"))?;
            let seed = a.seed.ok_or_else(|| Failure::flags("--seed is required for synthetic data"))?;
            let params = attack(&NoiseArgs { t, w: a.w, n_excess: a.n_excess })?;
            let data = HybridDatasets::synthetic_default(&CorrelatedAttackParams::symmetric(params, c), a.n, seed)?;
            if let Some(dir) = &a.dump_dir {
                fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
                for (name, ds) in
                    [("forward", &data.forward), ("backward", &data.backward), ("round_trip", &data.round_trip)]
                {
                    let path = dir.join(format!("{name}.csv"));
                    fs::write(&path, ds.to_csv()).map_err(|e| Failure::io(&path, e))?;
                }
            }
            data
        }
    };
    Ok(data.check(tol)?.to_key_value())
}
