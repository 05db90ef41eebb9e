//! Global coefficient sequences, correction factors and truncated Euler
//! products.
//!
//! A multiplicative sequence is assembled from prime-power values with a
//! smallest-prime-factor sieve: writing `n = p^e m` with `p = spf(n)` and
//! `p ∤ m`, `a(n) = a(p^e) a(m)`.
//!
//! The correction factors absorb everything in the squared series that the
//! product of zeta, symmetric-power and Rankin–Selberg factors does not:
//!
//! ```text
//! Σ λ_{f⊗f⊗f}(n)^2 n^{-s}    = ζ^5 L(sym^2)^8 L(sym^4)^4 L(sym^2 ⊗ sym^4) U
//! Σ λ_{sym^2 f⊗f}(n)^2 n^{-s} = ζ^2 L(sym^2)^3 L(sym^4)^2 L(sym^2 ⊗ sym^4) V
//! ```
//!
//! Locally `U_p` is the numerator `Σ_k λ(p^k)^2 x^k` multiplied by the
//! polynomial `∏ (1 - γ x)` over all denominator parameters.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::dd::{self, DoubleDouble};
use crate::satake::{local_factor, LocalFactor, ParameterMultiset, SatakeData, SatakeTable};
use crate::sieve::{max_exponent, FactorSieve};

/// Base families of multiplicative coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// `λ_{f⊗f⊗f}(n)`
    Triple,
    /// `λ_{sym^2 f⊗f}(n)`
    Sym2TimesF,
    /// `λ_{sym^j f}(n)`
    Sym(usize),
    /// `λ_{sym^i f⊗sym^j f}(n)`
    RankinSelberg(usize, usize),
}

impl SeriesKind {
    pub fn parameters(&self) -> ParameterMultiset {
        match *self {
            SeriesKind::Triple => ParameterMultiset::triple(),
            SeriesKind::Sym2TimesF => ParameterMultiset::sym2_times_f(),
            SeriesKind::Sym(j) => ParameterMultiset::sym(j),
            SeriesKind::RankinSelberg(i, j) => {
                ParameterMultiset::sym(i).tensor(&ParameterMultiset::sym(j))
            }
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKind::Triple => write!(f, "triple"),
            SeriesKind::Sym2TimesF => write!(f, "sym2xf"),
            SeriesKind::Sym(j) => write!(f, "sym:{j}"),
            SeriesKind::RankinSelberg(i, j) => write!(f, "rs:{i}:{j}"),
        }
    }
}

/// A series family, optionally squared pointwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub squared: bool,
}

impl SeriesSpec {
    pub fn plain(kind: SeriesKind) -> Self {
        Self {
            kind,
            squared: false,
        }
    }

    pub fn squared(kind: SeriesKind) -> Self {
        Self {
            kind,
            squared: true,
        }
    }

    pub fn label(&self) -> String {
        if self.squared {
            format!("{}-squared", self.kind)
        } else {
            self.kind.to_string()
        }
    }
}

impl FromStr for SeriesSpec {
    type Err = Error;

    /// Accepts `triple`, `sym2xf`, `sym:j`, `rs:i:j`, each optionally
    /// suffixed with `-sq` or `-squared`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unknown series {s:?}"));
        let (base, squared) = match s.strip_suffix("-squared").or_else(|| s.strip_suffix("-sq")) {
            Some(b) => (b, true),
            None => (s, false),
        };
        let parse_index = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = base.split(':').collect();
        let kind = match parts.as_slice() {
            ["triple"] => SeriesKind::Triple,
            ["sym2xf"] => SeriesKind::Sym2TimesF,
            ["sym", j] => SeriesKind::Sym(parse_index(j)?),
            ["rs", i, j] => SeriesKind::RankinSelberg(parse_index(i)?, parse_index(j)?),
            _ => return Err(bad()),
        };
        Ok(Self { kind, squared })
    }
}

/// Real arithmetic function `a(1..=N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSeries {
    label: String,
    values: Vec<f64>,
}

impl CoefficientSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a(n)` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Multiplicative extension of prime-power data up to `limit`.
///
/// `local` receives each prime `p <= limit` together with the depth
/// `max{e : p^e <= limit}` it must supply.
pub fn assemble_global<F>(label: impl Into<String>, limit: usize, local: F) -> Result<CoefficientSeries>
where
    F: Fn(u64, usize) -> Result<LocalFactor> + Sync,
{
    let sieve = FactorSieve::new(limit);
    let factors: Vec<LocalFactor> = sieve
        .primes()
        .par_iter()
        .map(|&p| {
            let needed = max_exponent(p, limit);
            let lf = local(p, needed)?;
            if lf.depth() < needed {
                return Err(Error::Depth {
                    prime: p,
                    needed,
                    available: lf.depth(),
                });
            }
            Ok(lf)
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; limit + 1];
    if limit >= 1 {
        values[1] = 1.0;
    }
    for lf in &factors {
        let p = lf.prime as usize;
        let mut q = p;
        let mut e = 1;
        loop {
            values[q] = lf.coeff(e);
            match q.checked_mul(p) {
                Some(next) if next <= limit => {
                    q = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    // p_part[n] = largest power of spf(n) dividing n
    let mut p_part = vec![0u32; limit + 1];
    for n in 2..=limit {
        let p = sieve.smallest_prime_factor(n) as usize;
        let rest = n / p;
        p_part[n] = if rest.is_multiple_of(p) {
            p_part[rest] * p as u32
        } else {
            p as u32
        };
        let pp = p_part[n] as usize;
        if pp != n {
            values[n] = values[pp] * values[n / pp];
        }
    }
    values.remove(0);
    Ok(CoefficientSeries::new(label, values))
}

/// Builds a family of coefficients for the form described by `table`.
pub fn form_series(spec: SeriesSpec, table: &SatakeTable, limit: usize) -> Result<CoefficientSeries> {
    if !table.covers(limit as u64) {
        return Err(Error::Domain(format!(
            "Satake data covers primes up to {}, series needs {limit}",
            table.limit()
        )));
    }
    let params = spec.kind.parameters();
    let base = assemble_global(spec.kind.to_string(), limit, |p, depth| {
        let s = table
            .get(p)
            .ok_or_else(|| Error::Domain(format!("no Satake data at p={p}")))?;
        Ok(local_factor(s, &params, depth.max(1)))
    })?;
    Ok(if spec.squared {
        square_series(&base)
    } else {
        base
    })
}

/// Pointwise square; the label gains a `-squared` suffix.
pub fn square_series(s: &CoefficientSeries) -> CoefficientSeries {
    CoefficientSeries::new(
        format!("{}-squared", s.label),
        s.values.iter().map(|v| v * v).collect(),
    )
}

/// Which correction factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorrectionKind {
    /// Correction for `Σ λ_{f⊗f⊗f}(n)^2 n^{-s}`.
    U,
    /// Correction for `Σ λ_{sym^2 f⊗f}(n)^2 n^{-s}`.
    V,
}

impl CorrectionKind {
    pub fn base(&self) -> SeriesKind {
        match self {
            CorrectionKind::U => SeriesKind::Triple,
            CorrectionKind::V => SeriesKind::Sym2TimesF,
        }
    }

    /// Exponents of `ζ`, `L(sym^2)`, `L(sym^4)`, `L(sym^2 ⊗ sym^4)`.
    pub fn exponents(&self) -> [u32; 4] {
        match self {
            CorrectionKind::U => [5, 8, 4, 1],
            CorrectionKind::V => [2, 3, 2, 1],
        }
    }

    /// The four L-functions of the factorization with their exponents.
    pub fn denominator_factors(&self) -> [(SeriesKind, u32); 4] {
        let [a, b, c, d] = self.exponents();
        [
            (SeriesKind::Sym(0), a),
            (SeriesKind::Sym(2), b),
            (SeriesKind::Sym(4), c),
            (SeriesKind::RankinSelberg(2, 4), d),
        ]
    }

    /// Parameters of the whole denominator product.
    pub fn denominator_parameters(&self) -> ParameterMultiset {
        let parts: Vec<(ParameterMultiset, u32)> = self
            .denominator_factors()
            .iter()
            .map(|(k, e)| (k.parameters(), *e))
            .collect();
        ParameterMultiset::union(parts.iter().map(|(m, e)| (m, *e)))
    }

    /// `(deg base)^2` alongside the exponent-weighted denominator degrees.
    pub fn degree_bookkeeping(&self) -> (usize, [usize; 4]) {
        let base = self.base().parameters().degree();
        let parts = self
            .denominator_factors()
            .map(|(k, e)| k.parameters().degree() * e as usize);
        (base * base, parts)
    }
}

impl fmt::Display for CorrectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrectionKind::U => write!(f, "U"),
            CorrectionKind::V => write!(f, "V"),
        }
    }
}

impl FromStr for CorrectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(CorrectionKind::U),
            "V" | "v" => Ok(CorrectionKind::V),
            _ => Err(Error::Domain(format!("unknown correction factor {s:?}"))),
        }
    }
}

/// Local factor `Σ_k λ(p^k)^2 x^k` of a squared series.
pub fn squared_local_factor(s: &SatakeData, kind: SeriesKind, depth: usize) -> LocalFactor {
    let params = kind.parameters();
    let base = local_factor(s, &params, depth);
    LocalFactor {
        prime: s.prime,
        coefficients: base.coefficients.iter().map(|c| c * c).collect(),
        degree: params.degree() * params.degree(),
    }
}

/// `U_p` or `V_p` to depth `K >= 2`.
pub fn correction_factor_local(s: &SatakeData, kind: CorrectionKind, depth: usize) -> Result<LocalFactor> {
    let coefficients = correction_series_dd(s, kind, depth)?
        .into_iter()
        .map(DoubleDouble::to_f64)
        .collect();
    Ok(LocalFactor {
        prime: s.prime,
        coefficients,
        degree: kind.base().parameters().degree().pow(2),
    })
}

fn squared_numerator_dd(s: &SatakeData, kind: SeriesKind, depth: usize) -> Vec<DoubleDouble> {
    kind.parameters()
        .expand_dd(s.angle, depth)
        .into_iter()
        .map(DoubleDouble::square)
        .collect()
}

// The quotient has coefficients far larger than either input near θ = 0 and
// θ = π, so it is formed in double-double arithmetic.
fn correction_series_dd(s: &SatakeData, kind: CorrectionKind, depth: usize) -> Result<Vec<DoubleDouble>> {
    if depth < 2 {
        return Err(Error::Domain(format!(
            "correction factors need depth >= 2, got {depth}"
        )));
    }
    let numerator = squared_numerator_dd(s, kind.base(), depth);
    let annihilator = kind.denominator_parameters().annihilator_dd(s.angle);
    Ok(dd::mul_truncated(&numerator, &annihilator, depth))
}

/// `U_p(x)` (or `V_p(x)`) at real `0 <= x < 1`, summing the numerator until
/// its terms drop below `1e-18` of the running total.
pub fn correction_value(s: &SatakeData, kind: CorrectionKind, x: f64) -> f64 {
    let params = kind.base().parameters();
    let depth = numerator_depth(params.degree(), x);
    let (coeffs, _) = params.expand(s.angle, depth);
    let mut numerator = 0.0;
    let mut power = 1.0;
    for c in coeffs {
        numerator += c * c * power;
        power *= x;
    }
    numerator * kind.denominator_parameters().annihilator_value(s.angle, x)
}

/// Depth after which `C(k+d-1, d-1)^2 x^k` is decreasing and below `1e-18`.
fn numerator_depth(degree: usize, x: f64) -> usize {
    const CAP: usize = 200_000;
    if x <= 0.0 {
        return 0;
    }
    let d = degree as f64;
    let mut log_bound = 0.0; // log C(k+d-1, d-1)
    for k in 1..CAP {
        log_bound += ((k as f64 + d - 1.0) / k as f64).ln();
        let log_term = 2.0 * log_bound + k as f64 * x.ln();
        let ratio = ((k as f64 + d) / (k as f64 + 1.0)).powi(2) * x;
        if ratio < 1.0 && log_term < (1e-18f64).ln() {
            return k;
        }
    }
    CAP
}

/// Coefficientwise comparison of both sides of the local factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactorizationCheck {
    pub prime: u64,
    /// `max_k |lhs_k - rhs_k| / max(1, max_j |lhs_j|)`.
    pub max_relative_deviation: f64,
    /// `x` coefficient of the correction factor.
    pub linear_coefficient: f64,
}

/// Multiplies the separately expanded denominator factors by the correction
/// factor and compares against the squared-series local factor.
pub fn check_local_factorization(s: &SatakeData, kind: CorrectionKind, depth: usize) -> Result<LocalFactorizationCheck> {
    let lhs = squared_numerator_dd(s, kind.base(), depth);
    let correction = correction_series_dd(s, kind, depth)?;
    let mut rhs = correction.clone();
    for (factor, exp) in kind.denominator_factors() {
        let expanded = factor.parameters().expand_dd(s.angle, depth);
        rhs = dd::mul_truncated(&rhs, &dd::pow_truncated(&expanded, exp, depth), depth);
    }
    let scale = lhs.iter().fold(1.0, |m: f64, a| m.max(a.to_f64().abs()));
    let max_relative_deviation = lhs
        .iter()
        .zip(&rhs)
        .map(|(&a, &b)| (a - b).abs().to_f64() / scale)
        .fold(0.0, f64::max);
    Ok(LocalFactorizationCheck {
        prime: s.prime,
        max_relative_deviation,
        linear_coefficient: correction[1].to_f64(),
    })
}

/// Worst case of [`check_local_factorization`] over a range of primes.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationSummary {
    pub kind: CorrectionKind,
    pub depth: usize,
    pub primes_checked: usize,
    pub max_relative_deviation: f64,
    pub worst_prime: Option<u64>,
    pub max_linear_coefficient: f64,
    /// `(degree, per-factor degrees)`; the parts sum to the degree.
    pub bookkeeping: (usize, [usize; 4]),
}

impl FactorizationSummary {
    /// Deviation below `tol`, linear coefficient below `linear_tol`, and
    /// exact degree bookkeeping.
    pub fn passes(&self, tol: f64, linear_tol: f64) -> bool {
        let (total, parts) = self.bookkeeping;
        self.max_relative_deviation < tol
            && self.max_linear_coefficient < linear_tol
            && parts.iter().sum::<usize>() == total
    }
}

/// Runs the local factorization check at every prime of `table` up to `prime_limit`.
pub fn verify_factorization(
    table: &SatakeTable,
    kind: CorrectionKind,
    prime_limit: u64,
    depth: usize,
) -> Result<FactorizationSummary> {
    let checks: Vec<LocalFactorizationCheck> = table
        .up_to(prime_limit)
        .par_iter()
        .map(|s| check_local_factorization(s, kind, depth))
        .collect::<Result<_>>()?;
    let mut summary = FactorizationSummary {
        kind,
        depth,
        primes_checked: checks.len(),
        max_relative_deviation: 0.0,
        worst_prime: None,
        max_linear_coefficient: 0.0,
        bookkeeping: kind.degree_bookkeeping(),
    };
    for c in &checks {
        if summary.worst_prime.is_none() || c.max_relative_deviation > summary.max_relative_deviation {
            summary.max_relative_deviation = c.max_relative_deviation;
            summary.worst_prime = Some(c.prime);
        }
        summary.max_linear_coefficient = summary.max_linear_coefficient.max(c.linear_coefficient.abs());
    }
    Ok(summary)
}

/// Local Euler factors that can be multiplied over primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EulerFactor {
    Zeta,
    Sym(usize),
    Correction(CorrectionKind),
}

impl EulerFactor {
    /// Products are only evaluated for `s` above this abscissa.
    pub fn abscissa(&self) -> f64 {
        match self {
            EulerFactor::Zeta | EulerFactor::Sym(_) => 1.0,
            EulerFactor::Correction(_) => 0.5,
        }
    }

    pub fn needs_form(&self) -> bool {
        !matches!(self, EulerFactor::Zeta)
    }

    /// Local value at `x = p^{-s}`.
    pub fn local_value(&self, s: &SatakeData, x: f64) -> f64 {
        match self {
            EulerFactor::Zeta => 1.0 / (1.0 - x),
            EulerFactor::Sym(j) => 1.0 / ParameterMultiset::sym(*j).annihilator_value(s.angle, x),
            EulerFactor::Correction(kind) => correction_value(s, *kind, x),
        }
    }
}

impl fmt::Display for EulerFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EulerFactor::Zeta => write!(f, "zeta"),
            EulerFactor::Sym(j) => write!(f, "sym:{j}"),
            EulerFactor::Correction(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for EulerFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta" => Ok(EulerFactor::Zeta),
            "U" | "u" => Ok(EulerFactor::Correction(CorrectionKind::U)),
            "V" | "v" => Ok(EulerFactor::Correction(CorrectionKind::V)),
            _ => match s.strip_prefix("sym:").map(str::parse::<usize>) {
                Some(Ok(j)) => Ok(EulerFactor::Sym(j)),
                _ => Err(Error::Domain(format!("unknown Euler factor {s:?}"))),
            },
        }
    }
}

/// Truncated Euler product with decade checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerProduct {
    pub s: f64,
    pub prime_limit: u64,
    pub primes_used: usize,
    pub value: f64,
    /// Running products at `P = 10, 100, ...` not exceeding the limit.
    pub checkpoints: Vec<(u64, f64)>,
    /// `|∏_{P/10 < p <= P} (local value) - 1|`, present when `P >= 10`.
    pub tail_change: Option<f64>,
}

/// `∏_{p <= P} local(p, p^{-s})` accumulated in increasing prime order.
pub fn evaluate_truncated_euler<F>(primes: &[u64], s: f64, prime_limit: u64, local: F) -> Result<EulerProduct>
where
    F: Fn(u64, f64) -> Result<f64>,
{
    if prime_limit < 2 {
        return Err(Error::Domain(format!("prime limit must be >= 2, got {prime_limit}")));
    }
    let covered = primes.partition_point(|&p| p <= prime_limit);
    let mut value = 1.0;
    let mut tail = 1.0;
    let mut checkpoints = Vec::new();
    let mut next_checkpoint = 10u64;
    let tail_start = prime_limit / 10;
    for &p in &primes[..covered] {
        while p > next_checkpoint {
            checkpoints.push((next_checkpoint, value));
            next_checkpoint *= 10;
        }
        let v = local(p, (p as f64).powf(-s))?;
        value *= v;
        if p > tail_start {
            tail *= v;
        }
    }
    while next_checkpoint <= prime_limit {
        checkpoints.push((next_checkpoint, value));
        next_checkpoint *= 10;
    }
    Ok(EulerProduct {
        s,
        prime_limit,
        primes_used: covered,
        value,
        checkpoints,
        tail_change: (prime_limit >= 10).then(|| (tail - 1.0).abs()),
    })
}

/// Euler product of a named factor; form-dependent factors read `table`.
pub fn euler_product(factor: EulerFactor, table: Option<&SatakeTable>, s: f64, prime_limit: u64) -> Result<EulerProduct> {
    if s.is_nan() || s <= factor.abscissa() {
        return Err(Error::Domain(format!(
            "{factor} is only evaluated for s > {}, got s = {s}",
            factor.abscissa()
        )));
    }
    match (factor.needs_form(), table) {
        (false, _) => {
            let primes = FactorSieve::new(prime_limit as usize).primes().to_vec();
            evaluate_truncated_euler(&primes, s, prime_limit, |_, x| Ok(1.0 / (1.0 - x)))
        }
        (true, None) => Err(Error::Domain(format!("{factor} needs a form"))),
        (true, Some(table)) => {
            if !table.covers(prime_limit) {
                return Err(Error::Domain(format!(
                    "Satake data covers primes up to {}, product needs {prime_limit}",
                    table.limit()
                )));
            }
            evaluate_truncated_euler(table.primes(), s, prime_limit, |p, x| {
                let sd = table.get(p).expect("prime present in table");
                Ok(factor.local_value(sd, x))
            })
        }
    }
}
