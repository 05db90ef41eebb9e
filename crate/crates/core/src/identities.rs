//! Prime-coefficient identities behind the two factorizations.
//!
//! Each identity compares two sides built from different primitives: the
//! Chebyshev values `λ_{sym^j f}(p)` on one side, and the `x` coefficient of an
//! expanded Rankin–Selberg or triple product local factor on the other.
//! Deviations are absolute.
//!
//! `composite-D` follows from the others:
//! `(λ_{sym^3} + λ_f)^2 = (1 + λ_{sym^2⊗sym^4}) + 2(λ_{sym^2} + λ_{sym^4}) + (1 + λ_{sym^2})`.

use std::fmt;

use rayon::prelude::*;

use crate::satake::{
    local_factor_rankin_selberg, local_factor_sym2_times_f, local_factor_triple, sym_power_prime_coeff,
    synthetic_angles, SatakeData, SatakeTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityId {
    E12,
    E13,
    E14,
    E15,
    CompositeL,
    DecompositionD,
    CompositeD,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::E12,
        IdentityId::E13,
        IdentityId::E14,
        IdentityId::E15,
        IdentityId::CompositeL,
        IdentityId::DecompositionD,
        IdentityId::CompositeD,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityId::E12 => "E12",
            IdentityId::E13 => "E13",
            IdentityId::E14 => "E14",
            IdentityId::E15 => "E15",
            IdentityId::CompositeL => "composite-L",
            IdentityId::DecompositionD => "decomposition-D",
            IdentityId::CompositeD => "composite-D",
        }
    }

    /// Both sides at one Satake point.
    pub fn sides(&self, s: &SatakeData) -> (f64, f64) {
        let lam = s.lambda;
        let sym = |j| sym_power_prime_coeff(s, j);
        let rs24 = || local_factor_rankin_selberg(s, 2, 4, 1).coeff(1);
        let triple = || local_factor_triple(s, 1).coeff(1);
        let sym2xf = || local_factor_sym2_times_f(s, 1).coeff(1);
        match self {
            IdentityId::E12 => {
                let t = triple();
                let l3 = sym(3);
                (t * t, l3 * l3 + 4.0 * l3 * lam + 4.0 * lam * lam)
            }
            IdentityId::E13 => (sym(3).powi(2), 1.0 + rs24()),
            IdentityId::E14 => (sym(2) + sym(4), sym(3) * lam),
            IdentityId::E15 => (lam * lam, 1.0 + sym(2)),
            IdentityId::CompositeL => (
                triple().powi(2),
                5.0 + 8.0 * sym(2) + 4.0 * sym(4) + rs24(),
            ),
            IdentityId::DecompositionD => (sym2xf(), sym(3) + lam),
            IdentityId::CompositeD => (
                sym2xf().powi(2),
                2.0 + 3.0 * sym(2) + 2.0 * sym(4) + rs24(),
            ),
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a tested Satake point came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SatakePoint {
    Prime(u64),
    Angle(f64),
}

impl fmt::Display for SatakePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatakePoint::Prime(p) => write!(f, "p={p}"),
            SatakePoint::Angle(t) => write!(f, "theta={t:.16e}"),
        }
    }
}

/// Outcome of one identity over a set of Satake points.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub identity: IdentityId,
    pub tested: usize,
    pub max_dev: f64,
    pub worst_point: Option<SatakePoint>,
    pub tol: f64,
}

impl IdentityReport {
    /// Strict: `max_dev < tol`, so `tol = 0` never passes.
    pub fn pass(&self) -> bool {
        self.max_dev < self.tol
    }

    /// Merges two reports of the same identity; ties keep `self`'s point.
    pub fn merge(self, other: IdentityReport) -> IdentityReport {
        debug_assert_eq!(self.identity, other.identity);
        let (max_dev, worst_point) = if other.max_dev > self.max_dev {
            (other.max_dev, other.worst_point)
        } else {
            (self.max_dev, self.worst_point)
        };
        IdentityReport {
            identity: self.identity,
            tested: self.tested + other.tested,
            max_dev,
            worst_point,
            tol: self.tol,
        }
    }
}

/// Source of Satake points.
#[derive(Clone, Copy, Debug)]
pub enum SatakeSource<'a> {
    /// Every prime up to the limit; the table must cover it.
    Form { table: &'a SatakeTable, prime_limit: u64 },
    /// Evenly spaced angles on `[0, π]` including both endpoints.
    SyntheticGrid { size: usize },
}

fn points(source: SatakeSource<'_>) -> Vec<(SatakePoint, SatakeData)> {
    match source {
        SatakeSource::Form { table, prime_limit } => table
            .up_to(prime_limit)
            .iter()
            .map(|s| (SatakePoint::Prime(s.prime), *s))
            .collect(),
        SatakeSource::SyntheticGrid { size } => synthetic_angles(size)
            .into_iter()
            .map(|t| (SatakePoint::Angle(t), SatakeData::from_angle(0, t)))
            .collect(),
    }
}

/// Largest absolute deviation of `id` over the source.
pub fn check_identity(id: IdentityId, source: SatakeSource<'_>, tol: f64) -> IdentityReport {
    let pts = points(source);
    let devs: Vec<f64> = pts
        .par_iter()
        .map(|(_, s)| {
            let (lhs, rhs) = id.sides(s);
            (lhs - rhs).abs()
        })
        .collect();
    let mut max_dev = 0.0;
    let mut worst_point = None;
    for ((pt, _), d) in pts.iter().zip(devs) {
        if worst_point.is_none() || d > max_dev {
            max_dev = d;
            worst_point = Some(*pt);
        }
    }
    IdentityReport {
        identity: id,
        tested: pts.len(),
        max_dev,
        worst_point,
        tol,
    }
}

/// Every identity over the form's primes up to `prime_limit` and a synthetic
/// grid of `grid_size` angles, one merged report per identity.
pub fn check_all(table: &SatakeTable, prime_limit: u64, grid_size: usize, tol: f64) -> Vec<IdentityReport> {
    IdentityId::ALL
        .iter()
        .map(|&id| {
            let form = check_identity(id, SatakeSource::Form { table, prime_limit }, tol);
            let grid = check_identity(id, SatakeSource::SyntheticGrid { size: grid_size }, tol);
            form.merge(grid)
        })
        .collect()
}
