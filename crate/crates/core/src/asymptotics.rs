//! Partial sums `S(x) = Σ_{n≤x} a(n)` and least-squares fits of
//! `S(x)/x ≈ P(log x)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::series::CoefficientSeries;

/// Sample points for a partial-sum table.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// `count` points spaced evenly in `log x` from `start` to `end`, each
    /// rounded to the nearest integer; duplicates after rounding are dropped.
    Geometric { start: u64, end: u64, count: usize },
    Explicit(Vec<u64>),
}

impl GridSpec {
    pub const DEFAULT_START: u64 = 1000;
    pub const DEFAULT_COUNT: usize = 40;

    pub fn default_for(limit: u64) -> Self {
        GridSpec::Geometric {
            start: Self::DEFAULT_START.min(limit),
            end: limit,
            count: Self::DEFAULT_COUNT,
        }
    }

    /// Strictly increasing points.
    pub fn points(&self) -> Result<Vec<u64>> {
        let mut pts = match self {
            GridSpec::Geometric { start, end, count } => {
                if *start == 0 || end < start {
                    return Err(Error::Domain(format!("geometric grid needs 1 <= start <= end, got {start}..{end}")));
                }
                match count {
                    0 => Vec::new(),
                    1 => vec![*end],
                    _ => {
                        let (a, b) = ((*start as f64).ln(), (*end as f64).ln());
                        (0..*count)
                            .map(|i| {
                                if i == 0 {
                                    *start
                                } else if i + 1 == *count {
                                    *end
                                } else {
                                    (a + (b - a) * i as f64 / (*count - 1) as f64).exp().round() as u64
                                }
                            })
                            .collect()
                    }
                }
            }
            GridSpec::Explicit(v) => {
                if v.contains(&0) {
                    return Err(Error::Domain("grid points must be positive".into()));
                }
                v.clone()
            }
        };
        pts.sort_unstable();
        pts.dedup();
        Ok(pts)
    }
}

/// `(x_i, S(x_i))` for a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSumTable {
    pub label: String,
    pub points: Vec<u64>,
    pub sums: Vec<f64>,
}

impl PartialSumTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums in index order, so extending the grid never changes earlier values.
pub fn partial_sums(series: &CoefficientSeries, grid: &GridSpec) -> Result<PartialSumTable> {
    let points = grid.points()?;
    if let Some(&last) = points.last() {
        if last > series.len() as u64 {
            return Err(Error::Range {
                point: last,
                limit: series.len(),
            });
        }
    }
    let mut sums = Vec::with_capacity(points.len());
    let mut acc = CompensatedSum::default();
    let mut n = 0usize;
    for &x in &points {
        while (n as u64) < x {
            acc.add(series.values()[n]);
            n += 1;
        }
        sums.push(acc.value());
    }
    Ok(PartialSumTable {
        label: series.label().to_string(),
        points,
        sums,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    /// Row `i` scaled by `sqrt(x_i)`.
    SqrtX,
}

impl Weighting {
    fn weight(&self, x: u64) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::SqrtX => (x as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "sqrt-x" => Ok(Weighting::SqrtX),
            _ => Err(Error::Domain(format!("unknown weighting '{s}'"))),
        }
    }
}

/// `P(t) = Σ coefficients[k] t^k` with `t = log x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedPolynomial {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    /// `S(x_i)/x_i − P(log x_i)`.
    pub residuals: Vec<f64>,
    /// Weighted root mean square of the residuals.
    pub rms: f64,
    pub weighting: Weighting,
}

impl FittedPolynomial {
    pub fn leading_coefficient(&self) -> f64 {
        self.coefficients[self.degree]
    }

    pub fn eval(&self, t: f64) -> f64 {
        crate::power_series::evaluate(&self.coefficients, t)
    }
}

fn normalized_ys(table: &PartialSumTable) -> (Vec<f64>, Vec<f64>) {
    let ts = table.points.iter().map(|&x| (x as f64).ln()).collect();
    let ys = table.points.iter().zip(&table.sums).map(|(&x, &s)| s / x as f64).collect();
    (ts, ys)
}

/// Least squares in the shifted basis `z = (t − c)/h`, `z ∈ [−1, 1]`, via QR.
pub fn fit_main_term(table: &PartialSumTable, degree: usize, weighting: Weighting) -> Result<FittedPolynomial> {
    let m = table.len();
    if m < degree + 2 {
        return Err(Error::Rank(format!(
            "degree {degree} fit needs at least {} points, got {m}",
            degree + 2
        )));
    }
    if let Some(&x) = table.points.iter().find(|&&x| x < 3) {
        return Err(Error::Domain(format!("fit requires x >= 3, got {x}")));
    }
    let (ts, ys) = normalized_ys(table);
    let (lo, hi) = (ts[0], ts[m - 1]);
    if hi <= lo {
        return Err(Error::Rank("grid spans a single point".into()));
    }
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let ws: Vec<f64> = table.points.iter().map(|&x| weighting.weight(x)).collect();

    let a = DMatrix::from_fn(m, degree + 1, |i, k| ws[i] * ((ts[i] - c) / h).powi(k as i32));
    let b = DVector::from_fn(m, |i, _| ws[i] * ys[i]);
    let qr = a.qr();
    let r = qr.r();
    let diag_max = (0..=degree).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if (0..=degree).any(|k| r[(k, k)].abs() <= diag_max * 1e-13 * m as f64) {
        return Err(Error::Rank(format!("degenerate grid for degree {degree}")));
    }
    let qtb = qr.q().transpose() * &b;
    let beta = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Rank("singular triangular factor".into()))?;

    // Expand Σ β_k ((t − c)/h)^k into monomials in t.
    let mut coefficients = vec![0.0; degree + 1];
    for (k, &bk) in beta.iter().enumerate() {
        let scale = bk / h.powi(k as i32);
        let mut binom = 1.0;
        for j in 0..=k {
            coefficients[j] += scale * binom * (-c).powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }

    // Residuals come from the z-basis model to avoid monomial cancellation.
    let residuals: Vec<f64> = ts
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| {
            let z = (t - c) / h;
            y - beta.iter().rev().fold(0.0, |acc, &bk| acc * z + bk)
        })
        .collect();
    let wsum: f64 = ws.iter().map(|w| w * w).sum();
    let rms = (residuals.iter().zip(&ws).map(|(r, w)| (w * r).powi(2)).sum::<f64>() / wsum).sqrt();
    Ok(FittedPolynomial {
        degree,
        coefficients,
        residuals,
        rms,
        weighting,
    })
}

/// Fit residuals at or below this fraction of `max |S(x)/x|` count as noise.
pub const NOISE_FLOOR: f64 = 1e-12;

pub const EXPONENT_CAVEAT: &str =
    "empirical slope over a finite grid; cannot separate exponents closer than about 1e-1";

/// Empirical growth exponent of `S(x) − x P(log x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualExponent {
    /// `None` when the residuals are below noise or too few differences survive.
    pub value: Option<f64>,
    pub below_noise: bool,
    pub caveat: &'static str,
}

/// Estimates `θ` in `S(x) − x P(log x) ≍ x^θ`.
///
/// Divided differences of order `d + 1` of `S(x)/x` in `t = log x` annihilate
/// any degree-`d` polynomial in `t`, leaving a quantity of size `e^{(θ−1)t}`.
/// `θ − 1` is the least-squares slope of their log-magnitudes against `t`
/// over the upper half of the grid.
pub fn residual_exponent_estimate(table: &PartialSumTable, fitted: &FittedPolynomial) -> ResidualExponent {
    let sentinel = |below_noise| ResidualExponent {
        value: None,
        below_noise,
        caveat: EXPONENT_CAVEAT,
    };
    let (ts, ys) = normalized_ys(table);
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if fitted.residuals.iter().all(|r| r.abs() <= NOISE_FLOOR * scale) {
        return sentinel(true);
    }
    let order = fitted.degree + 1;
    let start = ts.len() / 2;
    let (ts, ys) = (&ts[start..], &ys[start..]);
    if ts.len() <= order {
        return sentinel(false);
    }
    let mut samples = Vec::new();
    for i in 0..ts.len() - order {
        let dd = divided_difference(&ts[i..=i + order], &ys[i..=i + order]);
        if dd != 0.0 && dd.is_finite() {
            let centre = ts[i..=i + order].iter().sum::<f64>() / (order + 1) as f64;
            samples.push((centre, dd.abs().ln()));
        }
    }
    if samples.len() < 2 {
        return sentinel(false);
    }
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - my)).sum();
    if sxx == 0.0 {
        return sentinel(false);
    }
    ResidualExponent {
        value: Some(1.0 + sxy / sxx),
        below_noise: false,
        caveat: EXPONENT_CAVEAT,
    }
}

/// `f[t_0, ..., t_k]` by the Newton table.
fn divided_difference(ts: &[f64], ys: &[f64]) -> f64 {
    let mut d = ys.to_vec();
    for level in 1..ts.len() {
        for i in 0..ts.len() - level {
            d[i] = (d[i + 1] - d[i]) / (ts[i + level] - ts[i]);
        }
    }
    d[0]
}

/// Share of positive and of negative residuals over the upper half of the grid.
pub fn upper_half_sign_balance(fitted: &FittedPolynomial) -> (f64, f64) {
    let upper = &fitted.residuals[fitted.residuals.len() / 2..];
    let n = upper.len().max(1) as f64;
    let pos = upper.iter().filter(|r| **r > 0.0).count() as f64;
    let neg = upper.iter().filter(|r| **r < 0.0).count() as f64;
    (pos / n, neg / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(points: Vec<u64>, f: impl Fn(f64) -> f64) -> PartialSumTable {
        let sums = points.iter().map(|&x| f(x as f64)).collect();
        PartialSumTable {
            label: "synthetic".into(),
            points,
            sums,
        }
    }

    fn geometric(count: usize) -> Vec<u64> {
        GridSpec::Geometric { start: 1000, end: 1_000_000, count }.points().unwrap()
    }

    #[test]
    fn quartic_log_model() {
        let table = synthetic(geometric(20), |x| x * x.ln().powi(4));
        let fit = fit_main_term(&table, 4, Weighting::Uniform).unwrap();
        for (k, c) in fit.coefficients.iter().enumerate() {
            let want = if k == 4 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-6, "c{k} = {c}");
        }
        assert!(residual_exponent_estimate(&table, &fit).below_noise);
    }

    #[test]
    fn linear_log_model() {
        let table = synthetic(geometric(40), |x| x * (2.0 * x.ln() + 3.0));
        for w in [Weighting::Uniform, Weighting::SqrtX] {
            let fit = fit_main_term(&table, 1, w).unwrap();
            assert!((fit.coefficients[1] - 2.0).abs() < 1e-8);
            assert!((fit.coefficients[0] - 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn planted_power_exponent() {
        let table = synthetic(geometric(40), |x| x * x.ln() + x.powf(0.7));
        let fit = fit_main_term(&table, 1, Weighting::Uniform).unwrap();
        let est = residual_exponent_estimate(&table, &fit);
        assert!(!est.below_noise);
        let v = est.value.unwrap();
        assert!((v - 0.7).abs() < 0.1, "{v}");
    }

    #[test]
    fn too_few_points_is_rank_error() {
        let table = synthetic(geometric(5), |x| x);
        assert!(matches!(fit_main_term(&table, 4, Weighting::Uniform), Err(Error::Rank(_))));
        assert!(fit_main_term(&table, 3, Weighting::Uniform).is_ok());
    }

    #[test]
    fn sums_of_ones() {
        let ones = CoefficientSeries::new("one", vec![1.0; 200]);
        let t = partial_sums(&ones, &GridSpec::Explicit(vec![100, 1, 200])).unwrap();
        assert_eq!(t.points, vec![1, 100, 200]);
        assert_eq!(t.sums, vec![1.0, 100.0, 200.0]);
        let empty = partial_sums(&ones, &GridSpec::Explicit(vec![])).unwrap();
        assert!(empty.is_empty());
        assert!(matches!(
            partial_sums(&ones, &GridSpec::Explicit(vec![201])),
            Err(Error::Range { point: 201, limit: 200 })
        ));
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut vals = vec![1e-16; 1000];
        vals.insert(0, 1.0);
        let s = CoefficientSeries::new("tiny", vals);
        let t = partial_sums(&s, &GridSpec::Explicit(vec![1001])).unwrap();
        assert!((t.sums[0] - (1.0 + 1e-13)).abs() < 1e-18);
    }

    #[test]
    fn default_grid_endpoints() {
        let pts = GridSpec::default_for(1_000_000).points().unwrap();
        assert_eq!(pts.len(), 40);
        assert_eq!(pts[0], 1000);
        assert_eq!(pts[39], 1_000_000);
    }

    proptest! {
        #[test]
        fn prefix_stable(vals in proptest::collection::vec(-10.0f64..10.0, 50..200), cut in 1usize..50) {
            let s = CoefficientSeries::new("r", vals.clone());
            let full: Vec<u64> = (1..=vals.len() as u64).collect();
            let a = partial_sums(&s, &GridSpec::Explicit(full[..cut].to_vec())).unwrap();
            let b = partial_sums(&s, &GridSpec::Explicit(full)).unwrap();
            prop_assert_eq!(&a.sums[..], &b.sums[..cut]);
        }

        #[test]
        fn nonnegative_terms_give_monotone_sums(vals in proptest::collection::vec(0.0f64..5.0, 10..300)) {
            let n = vals.len() as u64;
            let s = CoefficientSeries::new("r", vals);
            let t = partial_sums(&s, &GridSpec::Explicit((1..=n).collect())).unwrap();
            prop_assert!(t.sums.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn fit_degree_matches(d in 0usize..5) {
            let table = synthetic(geometric(20), |x| x * (1.0 + x.ln()).sqrt());
            let fit = fit_main_term(&table, d, Weighting::Uniform).unwrap();
            prop_assert_eq!(fit.degree, d);
            prop_assert_eq!(fit.coefficients.len(), d + 1);
        }
    }
}
