//! Smallest-prime-factor sieve used for multiplicative assembly.

/// Smallest prime factor of every integer in `0..=limit`.
///
/// Entries 0 and 1 hold 0.
#[derive(Clone, Debug)]
pub struct FactorSieve {
    spf: Vec<u32>,
    primes: Vec<u64>,
}

impl FactorSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for n in 2..=limit {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u64);
            }
            let p_n = spf[n];
            for &p in &primes {
                let m = n * p as usize;
                if p as u32 > p_n || m > limit {
                    break;
                }
                spf[m] = p as u32;
            }
        }
        Self { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: usize) -> u64 {
        self.spf[n] as u64
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Prime factorization of `n` as `(p, e)` pairs in increasing order of `p`.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }
}

/// Largest `e` with `p^e <= limit`.
pub fn max_exponent(p: u64, limit: usize) -> usize {
    let mut e = 0;
    let mut q = p as u128;
    while q <= limit as u128 {
        e += 1;
        q *= p as u128;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_spf(n: usize) -> u64 {
        (2..=n).find(|d| n.is_multiple_of(*d)).unwrap() as u64
    }

    #[test]
    fn spf_agrees_with_trial_division() {
        let sieve = FactorSieve::new(2000);
        for n in 2..=2000 {
            assert_eq!(sieve.smallest_prime_factor(n), trial_division_spf(n), "n={n}");
        }
        assert_eq!(sieve.primes().len(), 303);
    }

    #[test]
    fn factorization_reconstructs() {
        let sieve = FactorSieve::new(10_000);
        for n in 2..=10_000usize {
            let prod: u64 = sieve
                .factorize(n)
                .iter()
                .map(|&(p, e)| p.pow(e))
                .product();
            assert_eq!(prod, n as u64);
        }
        assert_eq!(sieve.factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }

    #[test]
    fn exponents() {
        assert_eq!(max_exponent(2, 1_000_000), 19);
        assert_eq!(max_exponent(3, 8), 1);
        assert_eq!(max_exponent(3, 9), 2);
        assert_eq!(max_exponent(1_009, 1_000), 0);
    }

    #[test]
    fn tiny_limits() {
        assert!(FactorSieve::new(1).primes().is_empty());
        assert_eq!(FactorSieve::new(2).primes(), &[2]);
    }
}
