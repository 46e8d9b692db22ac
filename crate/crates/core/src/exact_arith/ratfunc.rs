use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{ArithError, BigRational, DensePolynomial};

/// A quotient of one-variable rational polynomials in canonical form:
/// numerator and denominator are coprime and the denominator is monic.
/// The zero function is stored as `0 / 1`. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: DensePolynomial,
    den: DensePolynomial,
}

impl RationalFunction {
    pub fn new(num: DensePolynomial, den: DensePolynomial) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = DensePolynomial::gcd(&num, &den);
        let (num, _) = num.div_rem(&g)?;
        let (den, _) = den.div_rem(&g)?;
        let lc_inv = den.leading().expect("nonzero").recip();
        Ok(RationalFunction { num: num.scale(&lc_inv), den: den.scale(&lc_inv) })
    }

    pub fn zero() -> Self {
        RationalFunction { num: DensePolynomial::zero(), den: DensePolynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunction { num: DensePolynomial::constant(c), den: DensePolynomial::one() }
    }

    pub fn from_poly(p: DensePolynomial) -> Self {
        RationalFunction { num: p, den: DensePolynomial::one() }
    }

    /// The identity function `u`.
    pub fn variable() -> Self {
        Self::from_poly(DensePolynomial::variable())
    }

    pub fn num(&self) -> &DensePolynomial {
        &self.num
    }

    pub fn den(&self) -> &DensePolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(c)` when the function is the constant `c`.
    pub fn as_constant(&self) -> Option<BigRational> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(BigRational::zero()),
            (Some(0), Some(0)) => Some(self.num.coeffs()[0].clone()),
            _ => None,
        }
    }

    /// Exact value at `x`; fails if `x` is a pole of the reduced function.
    pub fn eval(&self, x: &BigRational) -> Result<BigRational, ArithError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(ArithError::Pole(x.clone()));
        }
        Ok(self.num.eval(x) / d)
    }

    /// Limit as the variable tends to zero, finite iff the numerator
    /// vanishes at zero to at least the order of the denominator.
    pub fn limit_at_zero(&self) -> Result<BigRational, ArithError> {
        let vn = match self.num.valuation() {
            None => return Ok(BigRational::zero()),
            Some(v) => v,
        };
        let vd = self.den.valuation().expect("denominator is nonzero");
        if vn < vd {
            return Err(ArithError::DivergesAtZero);
        }
        if vn > vd {
            return Ok(BigRational::zero());
        }
        Ok(&self.num.coeffs()[vn] / &self.den.coeffs()[vd])
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Self::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == DensePolynomial::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero den");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::new(num, &self.den * &rhs.den).expect("nonzero den")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero den")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    fn p(cs: &[i64]) -> DensePolynomial {
        DensePolynomial::new(cs.iter().map(|&c| int(c)).collect())
    }

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::new(p(n), p(d)).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(rf(&[1], &[0, 1]).eval(&int(2)).unwrap(), rat(1, 2));
        // (u^2 - 1)/(u - 1) cancels before evaluation
        assert_eq!(rf(&[-1, 0, 1], &[-1, 1]).eval(&int(1)).unwrap(), int(2));
        assert_eq!(rf(&[1, 3], &[5, 1]).eval(&rat(1, 3)).unwrap(), rat(3, 8));
    }

    #[test]
    fn pole_carries_point() {
        let err = rf(&[1], &[-2, 1]).eval(&int(2)).unwrap_err();
        assert_eq!(err, ArithError::Pole(int(2)));
    }

    #[test]
    fn limit_examples() {
        assert_eq!(rf(&[0, 1, 1], &[0, 1]).limit_at_zero().unwrap(), int(1));
        assert_eq!(RationalFunction::constant(rat(7, 3)).limit_at_zero().unwrap(), rat(7, 3));
        let f = rf(&[0, 1], &[0, 1, 1]);
        assert_eq!(f, rf(&[1], &[1, 1]));
        assert_eq!(f.limit_at_zero().unwrap(), int(1));
        assert_eq!(rf(&[1], &[0, 0, 1]).limit_at_zero(), Err(ArithError::DivergesAtZero));
    }

    #[test]
    fn canonical_form_is_structural() {
        let a = rf(&[2, 2], &[4, 4, 0]);
        assert_eq!(a, RationalFunction::constant(rat(1, 2)));
        assert_eq!(rf(&[0, 3], &[0, 6]).den(), &DensePolynomial::one());
        assert!(RationalFunction::new(p(&[1]), DensePolynomial::zero()).is_err());
    }

    #[test]
    fn field_operations() {
        let a = rf(&[1], &[0, 1]); // 1/u
        let b = rf(&[1], &[1, 1]); // 1/(u+1)
        let s = &a - &b; // 1/(u(u+1))
        assert_eq!(s, rf(&[1], &[0, 1, 1]));
        assert_eq!(&s * &rf(&[0, 1, 1], &[1]), RationalFunction::one());
        assert_eq!(s.recip().unwrap(), rf(&[0, 1, 1], &[1]));
        assert!(RationalFunction::zero().recip().is_err());
    }
}
