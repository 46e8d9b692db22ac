//! Exact arithmetic: rationals, dense one-variable polynomials, rational
//! functions in canonical form and truncated power series.
//!
//! Everything here is immutable after construction. The Bernoulli table is
//! the only shared state and is guarded for concurrent readers.

mod bernoulli;
mod poly;
mod ratfunc;
mod series;

pub use bernoulli::{bernoulli, hodge_b_series};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use poly::DensePolynomial;
pub use ratfunc::RationalFunction;
pub use series::{series_reciprocal, TruncatedSeries};

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("series with zero constant term is not invertible")]
    NonInvertibleSeries,
    #[error("pole at {0}")]
    Pole(BigRational),
    #[error("rational function diverges as the variable tends to zero")]
    DivergesAtZero,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
}

/// `n / d` as a reduced rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Best-effort decimal value of an exact rational.
pub fn to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to a scaled quotient for huge numerators/denominators.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(500);
    let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
    nf / df
}

/// Parses `"p/q"`, `"p"` or a finite decimal like `"-1.25"` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(n, d);
        return Some(if negative { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-5/3"), Some(rat(-5, 3)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("-1.25"), Some(rat(-5, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn decimal_of_huge_rational() {
        let big = BigRational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399) * 4);
        assert!((to_f64(&big) - 2.5).abs() < 1e-12);
    }
}
