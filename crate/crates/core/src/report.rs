//! JSON and CSV renderings of results. Every float is written with 17
//! significant digits so values round-trip exactly and output is
//! byte-for-byte reproducible.

use std::io::Write;

use serde_json::{json, Map, Number, Value};

use crate::asymptotics::{FittedPolynomial, PartialSumTable, ResidualExponent};
use crate::eigen::HeckeReport;
use crate::error::Result;
use crate::identities::IdentityReport;
use crate::series::{CoefficientSeries, EulerProduct, FactorizationSummary};

/// Text form of `v` with 17 significant digits; non-finite values have none.
pub fn format_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

/// `v` as a JSON number, or `null` when non-finite.
pub fn float(v: f64) -> Value {
    match format_float(v) {
        Some(s) => Value::Number(s.parse::<Number>().expect("formatted float is a JSON number")),
        None => Value::Null,
    }
}

fn floats(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| float(v)).collect())
}

fn fit_json(fit: &FittedPolynomial) -> Value {
    json!({
        "degree": fit.degree,
        "coeffs": floats(&fit.coefficients),
        "rms": float(fit.rms),
    })
}

/// The sentinel string `"below-noise"` replaces the value for exact fits.
pub fn residual_exponent_json(e: &ResidualExponent) -> Value {
    let value = match (e.below_noise, e.value) {
        (true, _) => Value::String("below-noise".into()),
        (false, Some(v)) => float(v),
        (false, None) => Value::Null,
    };
    json!({ "value": value, "caveat": e.caveat })
}

/// `coeffs[k]` is the coefficient of `(log x)^k`.
pub fn partial_sums_json(
    table: &PartialSumTable,
    fit: &FittedPolynomial,
    alt_fit: Option<&FittedPolynomial>,
    exponent: &ResidualExponent,
) -> Value {
    json!({
        "series": table.label,
        "grid": table.points,
        "sums": floats(&table.sums),
        "fit": fit_json(fit),
        "alt_fit": alt_fit.map(fit_json).unwrap_or(Value::Null),
        "residual_exponent": residual_exponent_json(exponent),
    })
}

pub fn identity_json(r: &IdentityReport) -> Value {
    json!({
        "identity": r.identity.name(),
        "tested": r.tested,
        "max_dev": float(r.max_dev),
        "worst_point": r.worst_point.map(|p| Value::String(p.to_string())).unwrap_or(Value::Null),
        "pass": r.pass(),
    })
}

pub fn identities_json(reports: &[IdentityReport], tol: f64) -> Value {
    json!({
        "tol": float(tol),
        "identities": reports.iter().map(identity_json).collect::<Vec<_>>(),
        "pass": reports.iter().all(IdentityReport::pass),
    })
}

pub fn factorization_json(s: &FactorizationSummary, tol: f64, linear_tol: f64) -> Value {
    let (total, parts) = s.bookkeeping;
    json!({
        "kind": s.kind.to_string(),
        "depth": s.depth,
        "primes_checked": s.primes_checked,
        "max_relative_deviation": float(s.max_relative_deviation),
        "worst_prime": s.worst_prime,
        "max_linear_coefficient": float(s.max_linear_coefficient),
        "degree": total,
        "factor_degrees": parts,
        "tol": float(tol),
        "pass": s.passes(tol, linear_tol),
    })
}

pub fn euler_json(label: &str, e: &EulerProduct) -> Value {
    let checkpoints: Vec<Value> = e
        .checkpoints
        .iter()
        .map(|&(p, v)| json!({ "prime_limit": p, "value": float(v) }))
        .collect();
    json!({
        "factor": label,
        "s": float(e.s),
        "prime_limit": e.prime_limit,
        "primes_used": e.primes_used,
        "value": float(e.value),
        "checkpoints": checkpoints,
        "tail_change": e.tail_change.map(float).unwrap_or(Value::Null),
    })
}

pub fn hecke_json(r: &HeckeReport, limit: usize) -> Value {
    json!({
        "limit": limit,
        "pairs_checked": r.pairs_checked,
        "prime_powers_checked": r.prime_powers_checked,
        "multiplicativity_violations": r.multiplicativity_violations,
        "recurrence_violations": r.recurrence_violations,
        "pass": r.passed(),
    })
}

/// Collects named sections into one object.
pub fn bundle<I: IntoIterator<Item = (String, Value)>>(sections: I) -> Value {
    Value::Object(sections.into_iter().collect::<Map<_, _>>())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write>(mut out: W, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, v).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// `n,value` rows after a header.
pub fn write_series_csv<W: Write>(mut out: W, s: &CoefficientSeries) -> Result<()> {
    writeln!(out, "n,value")?;
    for (i, &v) in s.values().iter().enumerate() {
        match format_float(v) {
            Some(f) => writeln!(out, "{},{f}", i + 1)?,
            None => writeln!(out, "{},nan", i + 1)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.0f64.sqrt(), 6.02214076e23, 5e-324, 0.0] {
            let s = format_float(v).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let text = serde_json::to_string(&float(v)).unwrap();
            assert_eq!(text.parse::<f64>().unwrap(), v);
            let mantissa = text.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17, "{text}");
        }
        assert_eq!(format_float(0.1).unwrap(), "1.0000000000000001e-1");
        assert_eq!(float(f64::NAN), Value::Null);
    }

    #[test]
    fn csv_layout() {
        let s = CoefficientSeries::new("x", vec![1.0, -0.5]);
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value\n1,1.0000000000000000e0\n2,-5.0000000000000000e-1\n");
    }

    #[test]
    fn below_noise_sentinel() {
        let e = ResidualExponent { value: None, below_noise: true, caveat: "c" };
        assert_eq!(residual_exponent_json(&e)["value"], "below-noise");
    }
}
