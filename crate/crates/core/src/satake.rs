//! Satake angles and truncated Euler local factors.
//!
//! With `α = e^{iθ}` and `β = e^{-iθ}`, every local parameter used here is a
//! power `e^{imθ}` for an integer `m`, so a local representation is stored as
//! a multiset of integer frequencies. `sym^j f` has frequencies
//! `j, j-2, ..., -j`; Rankin–Selberg products add frequencies pairwise.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dd::{ComplexDD, DoubleDouble};
use crate::eigen::NormalizedEigenvalues;
use crate::error::{Error, Result};
use crate::sieve::FactorSieve;

/// Slack allowed above the Deligne bound `|λ(p)| <= 2`.
pub const DELIGNE_TOLERANCE: f64 = 1e-12;

/// Default expansion depth of local factors.
pub const DEFAULT_DEPTH: usize = 30;

/// Ceiling on the imaginary residue of an expansion, relative to the
/// largest possible coefficient magnitude at each degree.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-12;

/// Satake data of a form at one prime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SatakeData {
    pub prime: u64,
    /// `θ_p ∈ [0, π]` with `λ(p) = 2 cos θ_p`.
    pub angle: f64,
    pub lambda: f64,
}

impl SatakeData {
    /// Satake data at an arbitrary angle; `lambda` is set to `2 cos θ`.
    pub fn from_angle(prime: u64, angle: f64) -> Self {
        Self {
            prime,
            angle,
            lambda: 2.0 * angle.cos(),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// `θ_p = arccos(λ / 2)`, clamping values within [`DELIGNE_TOLERANCE`] of ±2.
pub fn satake_from_lambda(prime: u64, lambda: f64) -> Result<SatakeData> {
    if !lambda.is_finite() || lambda.abs() > 2.0 + DELIGNE_TOLERANCE {
        return Err(Error::Domain(format!(
            "λ({prime}) = {lambda} violates the Deligne bound |λ(p)| <= 2"
        )));
    }
    let angle = (lambda / 2.0).clamp(-1.0, 1.0).acos();
    Ok(SatakeData {
        prime,
        angle,
        lambda,
    })
}

/// `λ_{sym^j f}(p) = sin((j+1)θ) / sin θ` via `u_{j+1} = λ u_j - u_{j-1}`.
pub fn sym_power_prime_coeff(s: &SatakeData, j: usize) -> f64 {
    chebyshev_u(s.lambda, j)
}

pub(crate) fn chebyshev_u(lambda: f64, j: usize) -> f64 {
    let (mut prev, mut cur) = (1.0, lambda);
    if j == 0 {
        return prev;
    }
    for _ in 1..j {
        let next = lambda * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Multiset of integer frequencies `m`, one per local parameter `e^{imθ}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParameterMultiset {
    freqs: Vec<i32>,
}

impl ParameterMultiset {
    /// Requires the multiset to be closed under `m -> -m`.
    pub fn new(mut freqs: Vec<i32>) -> Self {
        freqs.sort_unstable_by(|a, b| b.cmp(a));
        let mirrored: Vec<i32> = freqs.iter().rev().map(|m| -m).collect();
        assert_eq!(freqs, mirrored, "local parameters must be conjugation-closed");
        Self { freqs }
    }

    /// `{α^{j-m} β^m : 0 <= m <= j}`.
    pub fn sym(j: usize) -> Self {
        Self::new((0..=j as i32).map(|m| j as i32 - 2 * m).collect())
    }

    /// `{α^3, α, α, α, β^3, β, β, β}`.
    pub fn triple() -> Self {
        Self::new(vec![3, 1, 1, 1, -1, -1, -1, -3])
    }

    /// Parameters of `sym^2 f ⊗ f`: `{α^3, α, α, β, β, β^3}`.
    pub fn sym2_times_f() -> Self {
        Self::sym(2).tensor(&Self::sym(1))
    }

    /// All pairwise products (Rankin–Selberg).
    pub fn tensor(&self, other: &Self) -> Self {
        let freqs = self
            .freqs
            .iter()
            .flat_map(|a| other.freqs.iter().map(move |b| a + b))
            .collect();
        Self::new(freqs)
    }

    /// Concatenation with multiplicity, i.e. the parameters of a product of
    /// L-functions.
    pub fn union<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (&'a ParameterMultiset, u32)>,
    {
        let mut freqs = Vec::new();
        for (part, count) in parts {
            for _ in 0..count {
                freqs.extend_from_slice(&part.freqs);
            }
        }
        Self::new(freqs)
    }

    pub fn degree(&self) -> usize {
        self.freqs.len()
    }

    pub fn frequencies(&self) -> &[i32] {
        &self.freqs
    }

    /// Parameters `e^{imθ}` at angle `θ`.
    pub fn parameters(&self, angle: f64) -> Vec<Complex64> {
        self.freqs
            .iter()
            .map(|&m| Complex64::from_polar(1.0, m as f64 * angle))
            .collect()
    }

    /// Sum of the parameters, i.e. the `x` coefficient of the local factor.
    pub fn power_sum(&self, angle: f64) -> f64 {
        // Pair m with -m so the sum is real by construction.
        self.freqs.iter().map(|&m| (m as f64 * angle).cos()).sum()
    }

    /// Coefficients of `∏ (1 - γ x)^{-1}` up to `x^depth` with the largest
    /// relative imaginary residue seen before it was dropped.
    pub fn expand(&self, angle: f64, depth: usize) -> (Vec<f64>, f64) {
        let mut c = vec![Complex64::new(0.0, 0.0); depth + 1];
        c[0] = Complex64::new(1.0, 0.0);
        for gamma in self.parameters(angle) {
            for k in 1..=depth {
                let prev = c[k - 1];
                c[k] += gamma * prev;
            }
        }
        let d = self.degree();
        let mut residue: f64 = 0.0;
        let mut bound = 1.0f64; // C(k + d - 1, d - 1)
        let coeffs = c
            .iter()
            .enumerate()
            .map(|(k, z)| {
                if k > 0 {
                    bound = bound * (k + d - 1) as f64 / k as f64;
                }
                residue = residue.max(z.im.abs() / bound);
                z.re
            })
            .collect();
        (coeffs, residue)
    }

    /// `∏ (1 - γ x)`, the polynomial inverse of the local factor.
    pub fn annihilator(&self, angle: f64) -> Vec<f64> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.degree() + 1];
        c[0] = Complex64::new(1.0, 0.0);
        for (n, gamma) in self.parameters(angle).into_iter().enumerate() {
            for k in (1..=n + 1).rev() {
                let prev = c[k - 1];
                c[k] -= gamma * prev;
            }
        }
        c.into_iter().map(|z| z.re).collect()
    }

    fn parameters_dd(&self, angle: f64) -> Vec<ComplexDD> {
        self.freqs
            .iter()
            .map(|&m| {
                let phase = m as f64 * angle;
                ComplexDD::new(phase.cos(), phase.sin())
            })
            .collect()
    }

    /// [`expand`](Self::expand) in double-double arithmetic; real parts only.
    pub fn expand_dd(&self, angle: f64, depth: usize) -> Vec<DoubleDouble> {
        let mut c = vec![ComplexDD::default(); depth + 1];
        c[0] = ComplexDD::ONE;
        for gamma in self.parameters_dd(angle) {
            for k in 1..=depth {
                c[k] = c[k] + gamma * c[k - 1];
            }
        }
        c.into_iter().map(|z| z.re).collect()
    }

    /// [`annihilator`](Self::annihilator) in double-double arithmetic.
    pub fn annihilator_dd(&self, angle: f64) -> Vec<DoubleDouble> {
        let mut c = vec![ComplexDD::default(); self.degree() + 1];
        c[0] = ComplexDD::ONE;
        for (n, gamma) in self.parameters_dd(angle).into_iter().enumerate() {
            for k in (1..=n + 1).rev() {
                c[k] = c[k] - gamma * c[k - 1];
            }
        }
        c.into_iter().map(|z| z.re).collect()
    }

    /// `∏ (1 - γ x)` evaluated at real `x`.
    pub fn annihilator_value(&self, angle: f64, x: f64) -> f64 {
        self.parameters(angle)
            .into_iter()
            .fold(Complex64::new(1.0, 0.0), |acc, g| acc * (1.0 - g * x))
            .re
    }
}

/// Truncated Euler factor at one prime.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactor {
    pub prime: u64,
    /// `a_0 ..= a_K`, where `a_j` multiplies `p^{-js}`.
    pub coefficients: Vec<f64>,
    /// Degree of the underlying L-factor.
    pub degree: usize,
}

impl LocalFactor {
    pub fn depth(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficient of `p^{-js}`.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coefficients[j]
    }
}

/// Expansion of `∏_{γ} (1 - γ p^{-s})^{-1}` for an arbitrary parameter set.
pub fn local_factor(s: &SatakeData, params: &ParameterMultiset, depth: usize) -> LocalFactor {
    let (coefficients, residue) = params.expand(s.angle, depth);
    assert!(
        residue < IMAGINARY_RESIDUE_TOLERANCE,
        "imaginary residue {residue:e} at p={}",
        s.prime
    );
    LocalFactor {
        prime: s.prime,
        coefficients,
        degree: params.degree(),
    }
}

/// Local factor of `L(sym^j f, s)`.
pub fn local_factor_sym(s: &SatakeData, j: usize, depth: usize) -> LocalFactor {
    local_factor(s, &ParameterMultiset::sym(j), depth)
}

/// Local factor of `L(sym^i f ⊗ sym^j f, s)`.
pub fn local_factor_rankin_selberg(s: &SatakeData, i: usize, j: usize, depth: usize) -> LocalFactor {
    let params = ParameterMultiset::sym(i).tensor(&ParameterMultiset::sym(j));
    local_factor(s, &params, depth)
}

/// Local factor of the triple product `L(f ⊗ f ⊗ f, s)`.
pub fn local_factor_triple(s: &SatakeData, depth: usize) -> LocalFactor {
    local_factor(s, &ParameterMultiset::triple(), depth)
}

/// Local factor of `L(sym^2 f ⊗ f, s)`.
pub fn local_factor_sym2_times_f(s: &SatakeData, depth: usize) -> LocalFactor {
    local_factor(s, &ParameterMultiset::sym2_times_f(), depth)
}

/// Satake data of a form at every prime up to its coefficient limit.
#[derive(Clone, Debug)]
pub struct SatakeTable {
    primes: Vec<u64>,
    data: Vec<SatakeData>,
    limit: u64,
}

impl SatakeTable {
    /// Fails if some `|λ(p)|` exceeds the Deligne bound.
    pub fn from_eigenvalues(eigs: &NormalizedEigenvalues) -> Result<Self> {
        let sieve = FactorSieve::new(eigs.len());
        let data = sieve
            .primes()
            .iter()
            .map(|&p| satake_from_lambda(p, eigs.get(p as usize)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            primes: sieve.primes().to_vec(),
            data,
            limit: eigs.len() as u64,
        })
    }

    /// Builds a table from explicit entries sorted by prime.
    pub fn from_data(data: Vec<SatakeData>) -> Self {
        assert!(data.windows(2).all(|w| w[0].prime < w[1].prime));
        let limit = data.last().map_or(0, |s| s.prime);
        Self {
            primes: data.iter().map(|s| s.prime).collect(),
            data,
            limit,
        }
    }

    pub fn get(&self, p: u64) -> Option<&SatakeData> {
        self.primes.binary_search(&p).ok().map(|i| &self.data[i])
    }

    /// Every prime up to this bound is present.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn covers(&self, n: u64) -> bool {
        n <= self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Entries with `p <= limit`, in increasing order.
    pub fn up_to(&self, limit: u64) -> &[SatakeData] {
        let end = self.primes.partition_point(|&p| p <= limit);
        &self.data[..end]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Evenly spaced angles on `[0, π]`, endpoints included.
pub fn synthetic_angles(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    PI
                } else {
                    PI * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}
