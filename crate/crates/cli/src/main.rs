//! `triple-hecke`: coefficient generation, verification suites and fit reports.
//!
//! Exit status: 0 when every check passes, 1 on a failed check, 2 on a usage
//! error, 3 on an IO or resource error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use triple_hecke::asymptotics::{
    fit_main_term, partial_sums, residual_exponent_estimate, GridSpec, Weighting,
};
use triple_hecke::eigen::{
    generate_delta_coefficients, load_form, normalize, FourierCoefficients, DELTA_WEIGHT,
};
use triple_hecke::identities::check_all;
use triple_hecke::report;
use triple_hecke::satake::SatakeTable;
use triple_hecke::series::{
    euler_product, form_series, verify_factorization, CorrectionKind, EulerFactor, SeriesSpec,
};
use triple_hecke::Error;

/// Environment variable naming the coefficient cache directory.
const CACHE_ENV: &str = "TRIPLE_HECKE_CACHE";

/// Threshold on the correction factor's `x` coefficient.
const LINEAR_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "triple-hecke", version, about = "Hecke eigenvalues, Euler products and partial-sum fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write τ(1..=N) in the coefficient-file format.
    Tau {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a coefficient series as `n,value` CSV.
    Coeffs {
        #[command(flatten)]
        form: FormArg,
        /// triple, sym2xf, sym:J or rs:I:J, optionally with a -sq suffix.
        #[arg(long)]
        series: SeriesSpec,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Partial sums of a series and least-squares main-term fits.
    PartialSums(PartialSumsArgs),
    /// Truncated Euler product of a named factor.
    EulerEval {
        #[command(flatten)]
        form: FormArg,
        /// zeta, sym:J, U or V.
        #[arg(long)]
        factor: EulerFactor,
        #[arg(long)]
        s: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        prime_limit: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// Prime-coefficient identities at every prime and on a synthetic angle grid.
    Identities {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(2..))]
        prime_limit: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        synthetic_grid: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Local factorization of both squared series through their correction factors.
    Factorization {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
        prime_limit: u64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
        depth: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PartialSumsArgs {
    #[command(flatten)]
    form: FormArg,
    #[arg(long)]
    series: SeriesSpec,
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    limit: u64,
    #[arg(long, default_value_t = 4)]
    fit_degree: usize,
    /// Comparison fit; defaults to one degree lower.
    #[arg(long)]
    alt_degree: Option<usize>,
    /// uniform or sqrt-x.
    #[arg(long, default_value = "uniform")]
    weighting: Weighting,
    #[arg(long, default_value_t = GridSpec::DEFAULT_START)]
    grid_start: u64,
    #[arg(long, default_value_t = GridSpec::DEFAULT_COUNT)]
    grid_count: usize,
    /// Comma-separated sample points; overrides the geometric grid.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u64>>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct FormArg {
    /// `delta` or a coefficient file.
    #[arg(long, default_value = "delta")]
    form: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::ResourceLimit { .. } | Error::Parse { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Tau { limit, out } => {
            let coeffs = coefficients(&FormArg { form: "delta".into() }, limit as usize)?;
            with_output(out.as_deref(), |w| coeffs.write_to(w))?;
            Ok(true)
        }
        Command::Coeffs { form, series, limit, out } => {
            let table = satake(&form, limit as usize)?;
            let s = form_series(series, &table, limit as usize)?;
            with_output(out.as_deref(), |w| report::write_series_csv(w, &s))?;
            Ok(true)
        }
        Command::Verify { suite } => match suite {
            Suite::Identities { form, prime_limit, tol, synthetic_grid, report: path } => {
                check_tolerance(tol)?;
                let table = satake(&form, prime_limit as usize)?;
                let reports = check_all(&table, prime_limit, synthetic_grid, tol);
                for r in &reports {
                    let worst = r.worst_point.map(|p| p.to_string()).unwrap_or_default();
                    eprintln!(
                        "{} {:<16} tested={} max_dev={:.16e} worst={worst}",
                        verdict(r.pass()),
                        r.identity.name(),
                        r.tested,
                        r.max_dev,
                    );
                }
                emit(path.as_deref(), &report::identities_json(&reports, tol))?;
                Ok(reports.iter().all(|r| r.pass()))
            }
            Suite::Factorization { form, prime_limit, depth, tol, report: path } => {
                check_tolerance(tol)?;
                let table = satake(&form, prime_limit as usize)?;
                let mut sections = Vec::new();
                let mut all = true;
                for kind in [CorrectionKind::U, CorrectionKind::V] {
                    let s = verify_factorization(&table, kind, prime_limit, depth as usize)?;
                    let pass = s.passes(tol, LINEAR_TOL);
                    all &= pass;
                    eprintln!(
                        "{} {kind} primes={} max_dev={:.16e} worst={} linear={:.16e}",
                        verdict(pass),
                        s.primes_checked,
                        s.max_relative_deviation,
                        s.worst_prime.map(|p| p.to_string()).unwrap_or_default(),
                        s.max_linear_coefficient,
                    );
                    sections.push((kind.to_string(), report::factorization_json(&s, tol, LINEAR_TOL)));
                }
                emit(path.as_deref(), &report::bundle(sections))?;
                Ok(all)
            }
        },
        Command::PartialSums(args) => partial_sums_cmd(args),
        Command::EulerEval { form, factor, s, prime_limit, report: path } => {
            let table = if factor.needs_form() {
                Some(satake(&form, prime_limit as usize)?)
            } else {
                None
            };
            let e = euler_product(factor, table.as_ref(), s, prime_limit)?;
            eprintln!(
                "{factor} s={s} P={prime_limit} value={:.16e} tail_change={}",
                e.value,
                e.tail_change.map(|t| format!("{t:.16e}")).unwrap_or_else(|| "n/a".into()),
            );
            emit(path.as_deref(), &report::euler_json(&factor.to_string(), &e))?;
            Ok(true)
        }
    }
}

fn partial_sums_cmd(args: PartialSumsArgs) -> Outcome {
    let limit = args.limit as usize;
    let table = satake(&args.form, limit)?;
    let series = form_series(args.series, &table, limit)?;
    let grid = match args.grid {
        Some(points) => GridSpec::Explicit(points),
        None => GridSpec::Geometric {
            start: args.grid_start.min(args.limit),
            end: args.limit,
            count: args.grid_count,
        },
    };
    let sums = partial_sums(&series, &grid)?;
    let fit = fit_main_term(&sums, args.fit_degree, args.weighting)?;
    let alt_degree = args.alt_degree.or(args.fit_degree.checked_sub(1));
    let alt = alt_degree
        .map(|d| fit_main_term(&sums, d, args.weighting))
        .transpose()?;
    let exponent = residual_exponent_estimate(&sums, &fit);
    eprintln!(
        "{} points={} degree={} rms={:.16e} leading={:.16e}",
        sums.label,
        sums.len(),
        fit.degree,
        fit.rms,
        fit.leading_coefficient(),
    );
    if let Some(a) = &alt {
        eprintln!("alt degree={} rms={:.16e}", a.degree, a.rms);
    }
    emit(
        args.report.as_deref(),
        &report::partial_sums_json(&sums, &fit, alt.as_ref(), &exponent),
    )?;
    Ok(true)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check_tolerance(tol: f64) -> Result<(), Failure> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::Usage(format!("tolerance must be non-negative, got {tol}")));
    }
    Ok(())
}

fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> triple_hecke::Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes the report to `path`, or to standard output when absent; human
/// summaries go to standard error.
fn emit(path: Option<&Path>, value: &Value) -> Result<(), Failure> {
    with_output(path, |w| report::write_json(w, value))
}

fn satake(form: &FormArg, limit: usize) -> Result<SatakeTable, Failure> {
    let coeffs = coefficients(form, limit)?;
    Ok(SatakeTable::from_eigenvalues(&normalize(&coeffs))?)
}

fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("triple-hecke-cache"))
}

fn cache_file(dir: &Path, limit: usize) -> PathBuf {
    dir.join(format!("tau-{limit}.txt"))
}

/// Smallest cached τ table covering `limit`.
fn cached_limit(dir: &Path, limit: usize) -> Option<usize> {
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("tau-")?.strip_suffix(".txt")?.parse::<usize>().ok()
        })
        .filter(|&n| n >= limit)
        .min()
}

/// `c(1..=limit)` for the requested form; τ is served from the cache when possible.
fn coefficients(form: &FormArg, limit: usize) -> Result<FourierCoefficients, Failure> {
    if form.form != "delta" {
        let coeffs = load_form(Path::new(&form.form))?;
        if coeffs.len() < limit {
            return Err(Failure::Usage(format!(
                "{} provides {} coefficients, {limit} required",
                form.form,
                coeffs.len()
            )));
        }
        return Ok(coeffs.truncated(limit));
    }
    let dir = cache_dir();
    if let Some(n) = cached_limit(&dir, limit) {
        match load_form(&cache_file(&dir, n)) {
            Ok(c) if c.weight() == DELTA_WEIGHT && c.len() == n => return Ok(c.truncated(limit)),
            Ok(_) => eprintln!("warning: ignoring inconsistent cache file {}", cache_file(&dir, n).display()),
            Err(e) => eprintln!("warning: ignoring unreadable cache file {}: {e}", cache_file(&dir, n).display()),
        }
    }
    let coeffs = generate_delta_coefficients(limit)?;
    if let Err(e) = store(&dir, &coeffs) {
        eprintln!("warning: could not write coefficient cache in {}: {e}", dir.display());
    }
    Ok(coeffs)
}

/// Writes through a temporary name so concurrent readers never see a partial file.
fn store(dir: &Path, coeffs: &FourierCoefficients) -> triple_hecke::Result<()> {
    std::fs::create_dir_all(dir)?;
    let target = cache_file(dir, coeffs.len());
    let tmp = dir.join(format!(".tau-{}.{}.tmp", coeffs.len(), std::process::id()));
    coeffs.save(&tmp)?;
    std::fs::rename(&tmp, &target)?;
    Ok(())
}
