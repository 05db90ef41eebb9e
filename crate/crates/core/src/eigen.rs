//! Fourier coefficients of level-one cusp forms and their Hecke structure.
//!
//! The built-in form is the discriminant `Δ = q ∏ (1 - q^n)^24` of weight 12.
//! Other even weights enter through coefficient files:
//!
//! ```text
//! weight=12
//! 1,1
//! 2,-24
//! 3,252
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ntt::{self, ResiduePoly};
use crate::sieve::FactorSieve;

/// Weight of the discriminant form.
pub const DELTA_WEIGHT: u32 = 12;

/// Default ceiling for built-in generation.
///
/// At this limit `|τ(n)| <= d(n) n^{11/2} < 2^131`, well inside the exact
/// range of the five-prime reconstruction.
pub const DEFAULT_MAX_LIMIT: usize = 4_000_000;

/// Where a form's coefficients come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormSource {
    BuiltinDelta,
    CoefficientFile(PathBuf),
}

/// Description of a form to load or generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSpec {
    weight: u32,
    source: FormSource,
    limit: usize,
}

impl FormSpec {
    pub fn delta(limit: usize) -> Result<Self> {
        Self::new(DELTA_WEIGHT, FormSource::BuiltinDelta, limit)
    }

    pub fn new(weight: u32, source: FormSource, limit: usize) -> Result<Self> {
        check_weight(weight)?;
        if limit == 0 {
            return Err(Error::Domain("limit must be at least 1".into()));
        }
        Ok(Self {
            weight,
            source,
            limit,
        })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn source(&self) -> &FormSource {
        &self.source
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Generates or loads the coefficients `c(1..=limit)`.
    ///
    /// A coefficient file must cover at least `limit` indices; extra lines are
    /// dropped.
    pub fn realize(&self) -> Result<FourierCoefficients> {
        let coeffs = match &self.source {
            FormSource::BuiltinDelta => generate_delta_coefficients(self.limit)?,
            FormSource::CoefficientFile(path) => load_form(path)?,
        };
        if coeffs.weight != self.weight {
            return Err(Error::Domain(format!(
                "file declares weight {}, expected {}",
                coeffs.weight, self.weight
            )));
        }
        if coeffs.len() < self.limit {
            return Err(Error::Domain(format!(
                "form provides {} coefficients, {} requested",
                coeffs.len(),
                self.limit
            )));
        }
        Ok(coeffs.truncated(self.limit))
    }
}

fn check_weight(weight: u32) -> Result<()> {
    if weight < 2 || !weight.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "weight must be an even integer >= 2, got {weight}"
        )));
    }
    Ok(())
}

/// Exact Fourier coefficients `c(1), ..., c(N)` of a normalized cusp form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierCoefficients {
    weight: u32,
    values: Vec<BigInt>,
}

impl FourierCoefficients {
    /// Builds from `c(1..=N)`; requires an even weight and `c(1) = 1`.
    pub fn new(weight: u32, values: Vec<BigInt>) -> Result<Self> {
        check_weight(weight)?;
        match values.first() {
            None => return Err(Error::Domain("at least one coefficient is required".into())),
            Some(c1) if !c1.is_one() => {
                return Err(Error::Domain(format!("c(1) must be 1, got {c1}")))
            }
            _ => {}
        }
        Ok(Self { weight, values })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Number of coefficients `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c(n)` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> &BigInt {
        &self.values[n - 1]
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn truncated(mut self, limit: usize) -> Self {
        self.values.truncate(limit);
        self
    }

    /// Writes the line-oriented coefficient-file format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(64 * 1024);
        writeln!(buf, "weight={}", self.weight).unwrap();
        for (i, c) in self.values.iter().enumerate() {
            writeln!(buf, "{},{}", i + 1, c).unwrap();
            if buf.len() > 60 * 1024 {
                out.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        out.write_all(buf.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    /// Parses the coefficient-file format.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let weight = match lines.next() {
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing weight header".into(),
                })
            }
            Some((_, line)) => {
                let line = line?;
                let value = line.trim().strip_prefix("weight=").ok_or(Error::Parse {
                    line: 1,
                    message: format!("expected `weight=<k>`, found {line:?}"),
                })?;
                value.trim().parse::<u32>().map_err(|e| Error::Parse {
                    line: 1,
                    message: format!("bad weight {value:?}: {e}"),
                })?
            }
        };
        check_weight(weight)?;

        let mut values = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let malformed = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let (n, c) = trimmed
                .split_once(',')
                .ok_or_else(|| malformed(format!("expected `<n>,<c(n)>`, found {trimmed:?}")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|e| malformed(format!("bad index {n:?}: {e}")))?;
            if n != values.len() + 1 {
                return Err(malformed(format!(
                    "expected index {}, found {n}",
                    values.len() + 1
                )));
            }
            let c: BigInt = c
                .trim()
                .parse()
                .map_err(|e| malformed(format!("bad coefficient {c:?}: {e}")))?;
            values.push(c);
        }
        Self::new(weight, values)
    }
}

/// Reads a coefficient file from disk.
pub fn load_form(path: &Path) -> Result<FourierCoefficients> {
    let file = std::fs::File::open(path)?;
    FourierCoefficients::read_from(std::io::BufReader::new(file))
}

/// `τ(1..=limit)` with the default resource ceiling.
pub fn generate_delta_coefficients(limit: usize) -> Result<FourierCoefficients> {
    generate_delta_coefficients_with_budget(limit, DEFAULT_MAX_LIMIT)
}

/// `τ(1..=limit)`, refusing limits above `max_limit`.
///
/// `(q;q)_∞^3` comes from Jacobi's sparse series `Σ (-1)^m (2m+1) q^{m(m+1)/2}`;
/// three truncated squarings give `(q;q)_∞^24`, whose `q^{n-1}` coefficient is
/// `τ(n)`.
pub fn generate_delta_coefficients_with_budget(
    limit: usize,
    max_limit: usize,
) -> Result<FourierCoefficients> {
    if limit == 0 {
        return Err(Error::Domain("limit must be at least 1".into()));
    }
    let hard_cap = 1usize << (ntt::MAX_TRANSFORM_LOG2 - 1);
    let max = max_limit.min(hard_cap).min(DEFAULT_MAX_LIMIT);
    if limit > max {
        return Err(Error::ResourceLimit {
            requested: limit,
            max,
        });
    }

    let mut cube = vec![0i64; limit];
    let mut m = 0usize;
    loop {
        let exp = m * (m + 1) / 2;
        if exp >= limit {
            break;
        }
        let c = (2 * m + 1) as i64;
        cube[exp] = if m.is_multiple_of(2) { c } else { -c };
        m += 1;
    }

    let mut series = ResiduePoly::from_signed(&cube);
    for _ in 0..3 {
        series = series.square_truncated(limit);
    }
    FourierCoefficients::new(DELTA_WEIGHT, series.to_bigints())
}

/// Hecke eigenvalues `λ(n) = c(n) / n^{(k-1)/2}` in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedEigenvalues {
    weight: u32,
    values: Vec<f64>,
}

impl NormalizedEigenvalues {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `λ(n)` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|λ(p)|` over primes `p <= N`, with the prime attaining it.
    pub fn max_prime_magnitude(&self, sieve: &FactorSieve) -> Option<(u64, f64)> {
        sieve
            .primes()
            .iter()
            .take_while(|&&p| p as usize <= self.len())
            .map(|&p| (p, self.get(p as usize).abs()))
            .fold(None, |best, cur| match best {
                Some((_, m)) if m >= cur.1 => best,
                _ => Some(cur),
            })
    }
}

/// Normalizes every coefficient.
pub fn normalize(coeffs: &FourierCoefficients) -> NormalizedEigenvalues {
    let exponent = coeffs.weight - 1;
    let values = coeffs
        .values
        .par_iter()
        .enumerate()
        .map(|(i, c)| normalized_value(c, (i + 1) as u64, exponent))
        .collect();
    NormalizedEigenvalues {
        weight: coeffs.weight,
        values,
    }
}

/// `c / n^{e/2}` for odd `e`, computed as `sign(c) * sqrt(c^2 / n^e)`.
///
/// The rational `c^2 / n^e` is scaled to at least 64 significant bits before
/// conversion, so the square root is within one ulp of the exact value.
fn normalized_value(c: &BigInt, n: u64, exponent: u32) -> f64 {
    if c.is_zero() {
        return 0.0;
    }
    let num = c.magnitude() * c.magnitude();
    let den = num_bigint::BigUint::from(n).pow(exponent);
    let shift = 128i64 - (num.bits() as i64 - den.bits() as i64);
    let scaled = if shift >= 0 {
        (num << shift as u64) / &den
    } else {
        num / (&den << (-shift) as u64)
    };
    let mantissa = scaled.to_f64().unwrap();
    // Halve the shift before the root so an odd shift does not cost a rounding.
    let root = if shift % 2 == 0 {
        mantissa.sqrt() * 2f64.powi(-(shift / 2) as i32)
    } else {
        (mantissa * 2.0).sqrt() * 2f64.powi(-((shift + 1) / 2) as i32)
    };
    match c.sign() {
        Sign::Minus => -root,
        _ => root,
    }
}

/// Violations of the Hecke relations; empty lists mean the form passes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeckeReport {
    /// Coprime pairs `m < n` with `c(mn) != c(m) c(n)`.
    pub multiplicativity_violations: Vec<(u64, u64)>,
    /// `(p, j)` with `c(p^{j+1}) != c(p) c(p^j) - p^{k-1} c(p^{j-1})`.
    pub recurrence_violations: Vec<(u64, u32)>,
    pub pairs_checked: u64,
    pub prime_powers_checked: u64,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.multiplicativity_violations.is_empty() && self.recurrence_violations.is_empty()
    }
}

/// Exact check of multiplicativity and the prime-power recurrence up to `N`.
pub fn verify_hecke_structure(coeffs: &FourierCoefficients) -> HeckeReport {
    let limit = coeffs.len();
    let sieve = FactorSieve::new(limit);

    let per_m: Vec<(Vec<(u64, u64)>, u64)> = (2..=limit / 3)
        .into_par_iter()
        .map(|m| {
            let cm = coeffs.get(m);
            let mut bad = Vec::new();
            let mut checked = 0u64;
            for n in (m + 1)..=(limit / m) {
                if m.gcd(&n) != 1 {
                    continue;
                }
                checked += 1;
                if *coeffs.get(m * n) != cm * coeffs.get(n) {
                    bad.push((m as u64, n as u64));
                }
            }
            (bad, checked)
        })
        .collect();
    let mut report = HeckeReport::default();
    for (bad, checked) in per_m {
        report.multiplicativity_violations.extend(bad);
        report.pairs_checked += checked;
    }

    let weight_exp = coeffs.weight - 1;
    for &p in sieve.primes() {
        let pk1 = BigInt::from(p).pow(weight_exp);
        let cp = coeffs.get(p as usize);
        // prev = c(p^{j-1}), cur = c(p^j)
        let mut prev = BigInt::one();
        let mut q = p as usize;
        let mut j = 1u32;
        while let Some(next_q) = q.checked_mul(p as usize).filter(|&v| v <= limit) {
            let cur = coeffs.get(q);
            let expected = cp * cur - &pk1 * &prev;
            report.prime_powers_checked += 1;
            if *coeffs.get(next_q) != expected {
                report.recurrence_violations.push((p, j));
            }
            prev = cur.clone();
            q = next_q;
            j += 1;
        }
    }
    report
}

/// True when `|c(n)|` is small enough to live in an `i128` for every `n`.
pub fn fits_i128(coeffs: &FourierCoefficients) -> bool {
    coeffs.values.iter().all(|c| c.abs().bits() < 127)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `q ∏_{n>=1} (1 - q^n)^24` to `limit` terms by schoolbook multiplication.
    fn delta_oracle(limit: usize) -> Vec<i128> {
        let mut series = vec![0i128; limit];
        series[0] = 1;
        for n in 1..limit {
            for _ in 0..24 {
                for i in (n..limit).rev() {
                    series[i] -= series[i - n];
                }
            }
        }
        series
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn delta_matches_schoolbook_expansion() {
        let oracle = delta_oracle(400);
        let tau = generate_delta_coefficients(400).unwrap();
        for (n, want) in oracle.iter().enumerate() {
            assert_eq!(*tau.get(n + 1), BigInt::from(*want), "tau({})", n + 1);
        }
    }

    #[test]
    fn small_tau_values() {
        let tau = generate_delta_coefficients(6).unwrap();
        assert_eq!(*tau.get(1), BigInt::from(1));
        assert_eq!(*tau.get(2), BigInt::from(-24));
        assert_eq!(*tau.get(3), BigInt::from(252));
        assert_eq!(*tau.get(6), BigInt::from(-6048));
        assert_eq!(generate_delta_coefficients(1).unwrap().len(), 1);
    }

    #[test]
    fn generation_limits() {
        assert!(matches!(generate_delta_coefficients(0), Err(Error::Domain(_))));
        assert!(matches!(
            generate_delta_coefficients_with_budget(1000, 999),
            Err(Error::ResourceLimit { requested: 1000, max: 999 })
        ));
    }

    #[test]
    fn normalization_values() {
        let tau = generate_delta_coefficients(4).unwrap();
        let lam = normalize(&tau);
        assert_eq!(lam.get(1), 1.0);
        assert_eq!(lam.get(4), -0.71875);
        let exact = -24.0 / 2f64.powf(5.5);
        assert!((lam.get(2) - exact).abs() <= f64::EPSILON * exact.abs());
        assert!((lam.get(2) + 0.530330085889911).abs() < 1e-15);
    }

    #[test]
    fn normalization_within_one_ulp() {
        // c = 3^7, n = 9, e = 7: exact quotient 3^7 / 3^7 = 1.
        assert_eq!(normalized_value(&BigInt::from(2187), 9, 7), 1.0);
        assert_eq!(normalized_value(&BigInt::from(-2187), 9, 7), -1.0);
        // 2048 / 4^{5.5} = 1
        assert_eq!(normalized_value(&BigInt::from(2048), 4, 11), 1.0);
        let v = normalized_value(&BigInt::from(252), 3, 11);
        let want = 252.0 / (243.0 * 3f64.sqrt());
        assert!((v - want).abs() <= 2.0 * f64::EPSILON * want);
    }

    #[test]
    fn file_round_trip() {
        let tau = generate_delta_coefficients(50).unwrap();
        let mut buf = Vec::new();
        tau.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("weight=12\n1,1\n2,-24\n3,252\n"));
        let back = FourierCoefficients::read_from(&buf[..]).unwrap();
        assert_eq!(back, tau);
    }

    #[test]
    fn file_errors() {
        let parse = |s: &str| FourierCoefficients::read_from(s.as_bytes());
        assert_eq!(parse("weight=12\n1,1\n2,-24\n").unwrap().len(), 2);
        assert!(matches!(parse("weight=12\n1,2\n"), Err(Error::Domain(_))));
        assert!(matches!(parse("weight=13\n1,1\n"), Err(Error::Domain(_))));
        assert!(matches!(parse("weight=12\n"), Err(Error::Domain(_))));
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("k=12\n1,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("weight=12\n1,1\n3,5\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("weight=12\n1,1\n2;7\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("weight=12\n1,1\n2,x\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn hecke_structure_of_delta() {
        let tau = generate_delta_coefficients(10_000).unwrap();
        let report = verify_hecke_structure(&tau);
        assert!(report.passed(), "{report:?}");
        assert!(report.pairs_checked > 10_000);
        assert!(report.prime_powers_checked == 51);
    }

    #[test]
    fn multiplicativity_counterexample() {
        let tau = generate_delta_coefficients(7).unwrap();
        let mut values = tau.values().to_vec();
        values[5] += 1;
        let bad = FourierCoefficients::new(12, values).unwrap();
        let report = verify_hecke_structure(&bad);
        assert_eq!(report.multiplicativity_violations, vec![(2, 3)]);
        assert!(report.recurrence_violations.is_empty());
    }

    #[test]
    fn recurrence_counterexample() {
        // c(4) = c(2)^2 omits the -2^11 c(1) term.
        let bad = FourierCoefficients::new(12, big(&[1, -24, 252, 576, 4830, -6048, -16744]))
            .unwrap();
        let report = verify_hecke_structure(&bad);
        assert_eq!(report.recurrence_violations, vec![(2, 1)]);
        assert!(report.multiplicativity_violations.is_empty());
    }

    #[test]
    fn deligne_bound_small() {
        let tau = generate_delta_coefficients(5000).unwrap();
        let lam = normalize(&tau);
        let sieve = FactorSieve::new(5000);
        let (_, max) = lam.max_prime_magnitude(&sieve).unwrap();
        assert!(max <= 2.0);
    }

    #[test]
    fn form_spec_validation() {
        assert!(FormSpec::delta(0).is_err());
        assert!(FormSpec::new(7, FormSource::BuiltinDelta, 5).is_err());
        let spec = FormSpec::delta(30).unwrap();
        assert_eq!(spec.realize().unwrap().len(), 30);
        assert!(fits_i128(&spec.realize().unwrap()));
    }

    proptest::proptest! {
        #[test]
        fn generation_is_prefix_stable(a in 1usize..300, b in 1usize..300) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let short = generate_delta_coefficients(lo).unwrap();
            let long = generate_delta_coefficients(hi).unwrap();
            proptest::prop_assert_eq!(short.values(), &long.values()[..lo]);
            let ls = normalize(&short);
            let ll = normalize(&long);
            proptest::prop_assert_eq!(ls.values(), &ll.values()[..lo]);
        }
    }
}
