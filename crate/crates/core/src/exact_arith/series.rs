use std::ops::Mul;

use num_traits::{One, Zero};

use super::{ArithError, BigRational};

/// Power series `c_0 + c_1 t + ... + c_order t^order + O(t^(order+1))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    /// Panics if `coeffs` is empty; the truncation order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least a constant term");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries { coeffs: vec![BigRational::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigRational::one();
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    /// Drops every term above `order` (or pads with zeros).
    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, BigRational::zero());
        TruncatedSeries { coeffs: c }
    }

    pub fn reciprocal(&self) -> Result<Self, ArithError> {
        series_reciprocal(self)
    }
}

/// Multiplicative inverse up to the input's truncation order.
pub fn series_reciprocal(s: &TruncatedSeries) -> Result<TruncatedSeries, ArithError> {
    let c0 = &s.coeffs[0];
    if c0.is_zero() {
        return Err(ArithError::NonInvertibleSeries);
    }
    let inv0 = c0.recip();
    let mut out: Vec<BigRational> = Vec::with_capacity(s.coeffs.len());
    out.push(inv0.clone());
    for n in 1..s.coeffs.len() {
        let acc = (1..=n).fold(BigRational::zero(), |acc, k| acc + &s.coeffs[k] * &out[n - k]);
        out.push(-acc * &inv0);
    }
    Ok(TruncatedSeries { coeffs: out })
}

/// Product truncated to the smaller of the two orders.
impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }
}
