//! Truncated integer convolution over several NTT-friendly primes.
//!
//! Residues from each prime are recombined with Garner's algorithm into the
//! symmetric range `(-M/2, M/2]`, where `M` is the product of the primes.
//! The result is exact whenever every true coefficient lies in that range.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Primes of the form `c * 2^k + 1` with `k >= 24`.
pub(crate) const MODULI: [u64; 5] = [998_244_353, 167_772_161, 469_762_049, 754_974_721, 2_013_265_921];

/// Largest power-of-two transform length supported by every modulus.
pub(crate) const MAX_TRANSFORM_LOG2: u32 = 23;

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("prime modulus has a primitive root")
}

fn transform<const P: u64>(a: &mut [u64], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let g = primitive_root(P);
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(g, (P - 1) / len as u64, P);
        if invert {
            w_len = pow_mod(w_len, P - 2, P);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % P;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = *v * tw % P;
                *u = if x + y >= P { x + y - P } else { x + y };
                *v = if x >= y { x - y } else { x + P - y };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, P - 2, P);
        for x in a.iter_mut() {
            *x = *x * n_inv % P;
        }
    }
}

fn convolve_mod<const P: u64>(a: &[u64], b: Option<&[u64]>, keep: usize) -> Vec<u64> {
    let out_len = match b {
        Some(b) => a.len() + b.len() - 1,
        None => 2 * a.len() - 1,
    };
    let size = out_len.next_power_of_two();
    let mut fa = a.to_vec();
    fa.resize(size, 0);
    transform::<P>(&mut fa, false);
    match b {
        Some(b) => {
            let mut fb = b.to_vec();
            fb.resize(size, 0);
            transform::<P>(&mut fb, false);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = *x * y % P;
            }
        }
        None => {
            for x in fa.iter_mut() {
                *x = *x * *x % P;
            }
        }
    }
    transform::<P>(&mut fa, true);
    fa.truncate(keep.min(out_len));
    fa
}

/// A polynomial stored as residues modulo each of [`MODULI`].
#[derive(Clone, Debug)]
pub(crate) struct ResiduePoly {
    residues: [Vec<u64>; 5],
}

impl ResiduePoly {
    pub(crate) fn from_signed(coeffs: &[i64]) -> Self {
        let residues = MODULI.map(|p| {
            coeffs
                .iter()
                .map(|&c| c.rem_euclid(p as i64) as u64)
                .collect()
        });
        Self { residues }
    }

    pub(crate) fn len(&self) -> usize {
        self.residues[0].len()
    }

    /// `self * other`, truncated to `keep` coefficients.
    #[cfg(test)]
    pub(crate) fn mul_truncated(&self, other: &Self, keep: usize) -> Self {
        let r = &self.residues;
        let s = &other.residues;
        Self {
            residues: [
                convolve_mod::<{ MODULI[0] }>(&r[0], Some(&s[0]), keep),
                convolve_mod::<{ MODULI[1] }>(&r[1], Some(&s[1]), keep),
                convolve_mod::<{ MODULI[2] }>(&r[2], Some(&s[2]), keep),
                convolve_mod::<{ MODULI[3] }>(&r[3], Some(&s[3]), keep),
                convolve_mod::<{ MODULI[4] }>(&r[4], Some(&s[4]), keep),
            ],
        }
    }

    /// `self^2`, truncated to `keep` coefficients.
    pub(crate) fn square_truncated(&self, keep: usize) -> Self {
        let r = &self.residues;
        Self {
            residues: [
                convolve_mod::<{ MODULI[0] }>(&r[0], None, keep),
                convolve_mod::<{ MODULI[1] }>(&r[1], None, keep),
                convolve_mod::<{ MODULI[2] }>(&r[2], None, keep),
                convolve_mod::<{ MODULI[3] }>(&r[3], None, keep),
                convolve_mod::<{ MODULI[4] }>(&r[4], None, keep),
            ],
        }
    }

    /// Reconstructs the signed integers whose residues are stored.
    pub(crate) fn to_bigints(&self) -> Vec<BigInt> {
        let garner = Garner::new();
        (0..self.len())
            .map(|i| garner.reconstruct(&self.residues.each_ref().map(|r| r[i])))
            .collect()
    }
}

struct Garner {
    /// `inv[i][j] = (p_j)^{-1} mod p_i` for `j < i`.
    inv: [[u64; 5]; 5],
    /// Partial products `p_0 * ... * p_{i-1}`.
    radix: [BigInt; 5],
    modulus: BigInt,
    half: BigInt,
}

impl Garner {
    fn new() -> Self {
        let mut inv = [[0u64; 5]; 5];
        for i in 0..5 {
            for j in 0..i {
                inv[i][j] = pow_mod(MODULI[j] % MODULI[i], MODULI[i] - 2, MODULI[i]);
            }
        }
        let mut radix: [BigInt; 5] = Default::default();
        let mut acc = BigInt::one();
        for i in 0..5 {
            radix[i] = acc.clone();
            acc *= MODULI[i];
        }
        let half = &acc >> 1;
        Self {
            inv,
            radix,
            modulus: acc,
            half,
        }
    }

    fn reconstruct(&self, residues: &[u64; 5]) -> BigInt {
        let mut digits = [0u64; 5];
        for i in 0..5 {
            let p = MODULI[i];
            let mut x = residues[i] % p;
            for j in 0..i {
                let d = digits[j] % p;
                x = (x + p - d) % p * self.inv[i][j] % p;
            }
            digits[i] = x;
        }
        let mut value = BigInt::zero();
        for i in 0..5 {
            if digits[i] != 0 {
                value += &self.radix[i] * digits[i];
            }
        }
        if value > self.half {
            value -= &self.modulus;
        }
        value
    }
}

/// Bit length of the product of all moduli, minus one for the sign.
#[cfg(test)]
pub(crate) fn signed_capacity_bits() -> u64 {
    let m: BigInt = MODULI.iter().map(|&p| BigInt::from(p)).product();
    m.bits() - 1
}
