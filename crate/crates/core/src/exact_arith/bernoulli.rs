use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{BigRational, TruncatedSeries};

static TABLE: RwLock<Vec<BigRational>> = RwLock::new(Vec::new());

/// The `n`-th Bernoulli number with `B_1 = -1/2`.
///
/// Values are memoized; readers share the table and extension takes the
/// write lock.
pub fn bernoulli(n: usize) -> BigRational {
    {
        let table = TABLE.read().unwrap_or_else(|e| e.into_inner());
        if let Some(b) = table.get(n) {
            return b.clone();
        }
    }
    let mut table = TABLE.write().unwrap_or_else(|e| e.into_inner());
    while table.len() <= n {
        let m = table.len();
        let next = if m == 0 {
            BigRational::one()
        } else if m > 1 && m % 2 == 1 {
            BigRational::zero()
        } else {
            // sum_{j=0}^{m} C(m+1, j) B_j = 0
            let mut binom = BigInt::one();
            let mut acc = BigRational::zero();
            for (j, b) in table.iter().enumerate() {
                if !b.is_zero() {
                    acc += b * BigRational::from_integer(binom.clone());
                }
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            -acc / BigRational::from_integer(BigInt::from(m + 1))
        };
        table.push(next);
    }
    table[n].clone()
}

/// Coefficients `b_0, ..., b_max_g` of `(t/2) / sin(t/2) = sum_g b_g t^(2g)`,
/// returned as a series in `s = t^2`.
pub fn hodge_b_series(max_g: usize) -> TruncatedSeries {
    // sin(t/2)/(t/2) = sum_n (-1)^n s^n / (4^n (2n+1)!)
    let mut coeffs = Vec::with_capacity(max_g + 1);
    let mut denom = BigInt::one();
    for n in 0..=max_g {
        if n > 0 {
            denom *= BigInt::from(4 * (2 * n) * (2 * n + 1));
        }
        let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        coeffs.push(BigRational::new(sign, denom.clone()));
    }
    TruncatedSeries::new(coeffs)
        .reciprocal()
        .expect("sine ratio has constant term 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    #[test]
    fn small_values() {
        assert_eq!(bernoulli(0), int(1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), int(0));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn b_series_prefix() {
        assert_eq!(hodge_b_series(0).coeffs(), &[int(1)]);
        assert_eq!(hodge_b_series(1).coeffs(), &[int(1), rat(1, 24)]);
        assert_eq!(hodge_b_series(2).coeffs(), &[int(1), rat(1, 24), rat(7, 5760)]);
    }

    #[test]
    fn concurrent_readers_agree() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || bernoulli(20 + 2 * i)))
            .collect();
        let got: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (i, b) in got.iter().enumerate() {
            assert_eq!(*b, bernoulli(20 + 2 * i));
        }
        assert_eq!(bernoulli(20), rat(-174611, 330));
    }
}
