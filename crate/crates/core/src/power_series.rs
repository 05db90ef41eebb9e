//! Truncated power series over `f64`, stored as dense coefficient vectors.
//!
//! A series of depth `K` keeps coefficients of `x^0 ..= x^K`.

/// `a * b` keeping terms up to `x^depth`.
pub fn mul_truncated(a: &[f64], b: &[f64], depth: usize) -> Vec<f64> {
    let len = (depth + 1).min(a.len() + b.len() - 1);
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a^e` keeping terms up to `x^depth`.
pub fn pow_truncated(a: &[f64], mut e: u32, depth: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    let mut base = a[..a.len().min(depth + 1)].to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_truncated(&acc, &base, depth);
        }
        e >>= 1;
        if e > 0 {
            base = mul_truncated(&base, &base, depth);
        }
    }
    acc.resize(depth + 1, 0.0);
    acc
}

/// `a / b` keeping terms up to `x^depth`; `b[0]` must be nonzero.
pub fn div_truncated(a: &[f64], b: &[f64], depth: usize) -> Vec<f64> {
    assert!(b[0] != 0.0, "series division by a series with zero constant term");
    let mut q = vec![0.0; depth + 1];
    for k in 0..=depth {
        let mut acc = a.get(k).copied().unwrap_or(0.0);
        for j in 1..=k.min(b.len() - 1) {
            acc -= b[j] * q[k - j];
        }
        q[k] = acc / b[0];
    }
    q
}

/// Horner evaluation of the truncated series at `x`.
pub fn evaluate(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
