//! Linear complex structures on the plane and their Beltrami coefficients,
//! plus the nodal smoothing and pre-gluing experiment in [`gluing`].
//!
//! Everything here is generic over [`Field`], so the same code runs in exact
//! rational arithmetic and in `f64`.

pub mod gluing;

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Zero};
use thiserror::Error;

pub use gluing::{
    dbar_scaling_sweep, parse_poly_map, preglue, smoothing_transition, transition_cr_residual, AreaMetric,
    GluedCylinder, PolyMap, PregluedMap, SweepReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeltramiError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("cannot parse map {0:?}: {1}")]
    Parse(String, String),
}

/// Scalars the linear algebra runs over. `approx_zero` is exact for
/// rationals and relative to `scale` for floats.
pub trait Field: Clone + Num + Neg<Output = Self> + PartialOrd + Debug {
    fn approx_zero(&self, scale: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Field for f64 {
    fn approx_zero(&self, scale: &Self) -> bool {
        self.abs() <= 1e-12 * scale.abs().max(1.0)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Field for BigRational {
    fn approx_zero(&self, _scale: &Self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        crate::exact_arith::to_f64(self)
    }
}

/// Row-major `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Field> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// The standard structure `[[0, -1], [1, 0]]`.
    pub fn standard() -> Self {
        Mat2::new(T::zero(), -T::one(), T::one(), T::zero())
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat2::new(self.a.clone() * s.clone(), self.b.clone() * s.clone(), self.c.clone() * s.clone(), self.d.clone() * s.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Mat2::new(
            self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            self.c.clone() * o.b.clone() + self.d.clone() * o.d.clone(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat2::new(self.a.clone() + o.a.clone(), self.b.clone() + o.b.clone(), self.c.clone() + o.c.clone(), self.d.clone() + o.d.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat2::new(self.a.clone() - o.a.clone(), self.b.clone() - o.b.clone(), self.c.clone() - o.c.clone(), self.d.clone() - o.d.clone())
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        Some(Mat2::new(
            self.d.clone() / det.clone(),
            -self.b.clone() / det.clone(),
            -self.c.clone() / det.clone(),
            self.a.clone() / det,
        ))
    }

    fn max_abs(&self) -> T {
        let abs = |x: &T| if *x < T::zero() { -x.clone() } else { x.clone() };
        [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .map(abs)
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    /// Entrywise comparison up to the field's notion of zero.
    pub fn approx_eq(&self, o: &Self) -> bool {
        let scale = {
            let (x, y) = (self.max_abs(), o.max_abs());
            if x > y { x } else { y }
        };
        let diff = self.sub(o);
        [&diff.a, &diff.b, &diff.c, &diff.d].iter().all(|x| x.approx_zero(&scale))
    }
}

/// A linear map `j` with `j^2 = -1`, oriented like the standard structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure<T> {
    j: Mat2<T>,
}

impl<T: Field> ComplexStructure<T> {
    pub fn new(j: Mat2<T>) -> Result<Self, BeltramiError> {
        let square = j.mul(&j);
        let scale = j.max_abs();
        let scale = scale.clone() * scale;
        let minus_one = Mat2::<T>::identity().scale(&-T::one());
        let residual = square.sub(&minus_one);
        if ![&residual.a, &residual.b, &residual.c, &residual.d].iter().all(|x| x.approx_zero(&scale)) {
            return Err(BeltramiError::Domain(format!("j^2 != -1 for {j:?}")));
        }
        // v ∧ jv for v = (1, 0) is the lower-left entry
        if !(j.c > T::zero()) {
            return Err(BeltramiError::Domain(format!("{j:?} has the wrong orientation")));
        }
        Ok(ComplexStructure { j })
    }

    pub fn standard() -> Self {
        ComplexStructure { j: Mat2::standard() }
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.j
    }
}

fn check_disk<T: Field>(gamma: &Complex<T>) -> Result<(), BeltramiError> {
    if gamma.norm_sqr() < T::one() {
        Ok(())
    } else {
        Err(BeltramiError::Domain(format!("|γ| >= 1 for γ = {gamma:?}")))
    }
}

/// The structure `g j_o g^-1` with `g = [[1+α, β], [β, 1-α]]`, `γ = α + iβ`.
pub fn j_of_mu<T: Field>(gamma: &Complex<T>) -> Result<ComplexStructure<T>, BeltramiError> {
    check_disk(gamma)?;
    let one = T::one();
    let g = Mat2::new(
        one.clone() + gamma.re.clone(),
        gamma.im.clone(),
        gamma.im.clone(),
        one - gamma.re.clone(),
    );
    let inv = g.inverse().expect("det g = 1 - |γ|^2 > 0");
    ComplexStructure::new(g.mul(&Mat2::standard()).mul(&inv))
}

/// `I - j j_o`; it intertwines `j_o` with `j` and has positive determinant.
pub fn canonical_section<T: Field>(gamma: &Complex<T>) -> Result<Mat2<T>, BeltramiError> {
    let j = j_of_mu(gamma)?;
    Ok(section_of(&j))
}

fn section_of<T: Field>(j: &ComplexStructure<T>) -> Mat2<T> {
    Mat2::identity().sub(&j.j.mul(&Mat2::standard()))
}

/// Reads `β/α` off `z ↦ αz + βz̄`, the complex form of `I - j j_o`.
pub fn mu_of_j<T: Field>(j: &ComplexStructure<T>) -> Result<Complex<T>, BeltramiError> {
    let g = section_of(j);
    let two = T::one() + T::one();
    let alpha = Complex::new(
        (g.a.clone() + g.d.clone()) / two.clone(),
        (g.c.clone() - g.b.clone()) / two.clone(),
    );
    let beta = Complex::new((g.a.clone() - g.d.clone()) / two.clone(), (g.b + g.c) / two);
    if alpha.norm_sqr().is_zero() {
        return Err(BeltramiError::Domain("degenerate complex structure".into()));
    }
    let mu = beta / alpha;
    check_disk(&mu)?;
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    fn q(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn zero_gives_standard_structure() {
        let j = j_of_mu(&Complex::new(q(0, 1), q(0, 1))).unwrap();
        assert_eq!(j.matrix(), &Mat2::standard());
        assert_eq!(mu_of_j(&j).unwrap(), Complex::new(q(0, 1), q(0, 1)));
    }

    #[test]
    fn half_gives_diagonal_conjugate() {
        let j = j_of_mu(&Complex::new(q(1, 2), q(0, 1))).unwrap();
        assert_eq!(j.matrix(), &Mat2::new(q(0, 1), q(-3, 1), q(1, 3), q(0, 1)));
        assert_eq!(mu_of_j(&j).unwrap(), Complex::new(q(1, 2), q(0, 1)));
        let sigma = canonical_section(&Complex::new(q(1, 2), q(0, 1))).unwrap();
        assert_eq!(sigma, Mat2::new(q(4, 1), q(0, 1), q(0, 1), q(4, 3)));
        assert_eq!(sigma.det(), q(16, 3));
    }

    #[test]
    fn imaginary_half() {
        let gamma = Complex::new(q(0, 1), q(1, 2));
        let j = j_of_mu(&gamma).unwrap();
        let m = j.matrix();
        assert_eq!(m.mul(m), Mat2::identity().scale(&q(-1, 1)));
        assert_eq!(mu_of_j(&j).unwrap(), gamma);
    }

    #[test]
    fn outside_disk_is_rejected() {
        assert!(j_of_mu(&Complex::new(q(1, 1), q(0, 1))).is_err());
        assert!(j_of_mu(&Complex::new(0.6f64, 0.8)).is_err());
    }

    #[test]
    fn invalid_structures_are_rejected() {
        assert!(ComplexStructure::new(Mat2::new(q(1, 1), q(0, 1), q(0, 1), q(1, 1))).is_err());
        // -j_o squares to -1 but has the opposite orientation
        assert!(ComplexStructure::new(Mat2::standard().scale(&q(-1, 1))).is_err());
    }

    #[test]
    fn float_roundtrip() {
        let gamma = Complex::new(0.3f64, -0.7);
        let back = mu_of_j(&j_of_mu(&gamma).unwrap()).unwrap();
        assert!((back - gamma).norm() < 1e-12);
    }
}
