//! Laurent polynomials `Σ c_n θⁿ` over an arbitrary coefficient field.
//!
//! Jost solutions are carried with `BigRational` coefficients so that the
//! channel recurrence can be checked as an exact coefficient identity; they
//! are evaluated numerically through [`ToComplex`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive};

/// Field elements usable as Laurent coefficients.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> {}

impl<T: Clone + PartialEq + fmt::Debug + Num + Neg<Output = T>> Coefficient for T {}

/// Numerical evaluation of a coefficient.
pub trait ToComplex {
    fn to_complex(&self) -> Complex64;
}

impl ToComplex for f64 {
    fn to_complex(&self) -> Complex64 {
        Complex64::from(*self)
    }
}

impl ToComplex for Complex64 {
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

impl ToComplex for BigRational {
    fn to_complex(&self) -> Complex64 {
        Complex64::from(self.to_f64().unwrap_or(f64::NAN))
    }
}

/// Exact rational value of a finite `f64`.
pub fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact rational from a numerator/denominator pair.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Finite map from exponents to nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly<T> {
    coeffs: BTreeMap<i32, T>,
}

impl<T: Coefficient> LaurentPoly<T> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exponent: i32, c: T) -> Self {
        let mut p = Self::zero();
        p.add_term(exponent, c);
        p
    }

    /// `θ^exponent`.
    pub fn power(exponent: i32) -> Self {
        Self::monomial(exponent, T::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, T)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exponent: i32, c: T) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.remove(&exponent) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(exponent, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exponent: i32) -> T {
        self.coeffs.get(&exponent).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &T)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&e, v)| (e, v.clone() * c.clone())))
    }

    /// Division by a nonzero scalar.
    pub fn div_scalar(&self, c: &T) -> Self {
        assert!(!c.is_zero(), "division by zero scalar");
        Self::from_terms(self.coeffs.iter().map(|(&e, v)| (e, v.clone() / c.clone())))
    }

    /// Multiplication by `θ^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e + shift, v.clone())).collect(),
        }
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> LaurentPoly<U> {
        LaurentPoly::from_terms(self.coeffs.iter().map(|(&e, c)| (e, f(c))))
    }
}

impl<T: Coefficient + ToComplex> LaurentPoly<T> {
    /// `Σ c_n θⁿ`; `θ` must be nonzero when negative exponents are present.
    pub fn eval(&self, theta: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&e, c)| c.to_complex() * theta.powi(e))
            .sum()
    }

    pub fn to_complex_poly(&self) -> LaurentPoly<Complex64> {
        self.map(ToComplex::to_complex)
    }
}

impl<T: Coefficient> Default for LaurentPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coefficient> Add for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (&e, c) in &rhs.coeffs {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl<T: Coefficient> Sub for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (&e, c) in &rhs.coeffs {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl<T: Coefficient> Mul for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for (&e1, c1) in &self.coeffs {
            for (&e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Coefficient> Neg for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn neg(self) -> LaurentPoly<T> {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }
}

impl<T: Coefficient> One for LaurentPoly<T> {
    fn one() -> Self {
        LaurentPoly::one()
    }
}

impl<T: Coefficient> Mul for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> LaurentPoly<T> {
        &self * &rhs
    }
}

impl<T: Coefficient + fmt::Display> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})θ")?,
                _ => write!(f, "({c})θ^{e}")?,
            }
        }
        Ok(())
    }
}

impl<T: Coefficient> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    #[test]
    fn normalization_drops_zeros() {
        let p = LaurentPoly::from_terms([(1, q(1, 2)), (1, q(-1, 2)), (-2, q(3, 1))]);
        assert_eq!(p.min_exponent(), Some(-2));
        assert_eq!(p.max_exponent(), Some(-2));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn theta_plus_inverse_squared() {
        let t = LaurentPoly::from_terms([(1, q(1, 1)), (-1, q(1, 1))]);
        let sq = &t * &t;
        assert_eq!(sq, LaurentPoly::from_terms([(2, q(1, 1)), (0, q(2, 1)), (-2, q(1, 1))]));
    }

    #[test]
    fn evaluation() {
        let p: LaurentPoly<f64> = LaurentPoly::from_terms([(-1, 2.0), (2, 1.0)]);
        let th = Complex64::new(0.0, 1.0);
        // 2/i + i² = -2i - 1
        assert!((p.eval(th) - Complex64::new(-1.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn exact_rational_is_exact() {
        let r = exact_rational(0.1);
        assert_ne!(r, q(1, 10));
        assert_eq!(r.to_f64().unwrap(), 0.1);
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly<Q>> {
        proptest::collection::vec((-4i32..5, -6i64..7, 1i64..5), 0..6)
            .prop_map(|t| LaurentPoly::from_terms(t.into_iter().map(|(e, n, d)| (e, q(n, d)))))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&(&a + &b) - &b) == a);
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in arb_poly(), b in arb_poly(), re in 0.3f64..1.5, arg in 0.0f64..6.2) {
            let th = Complex64::from_polar(re, arg);
            let lhs = (&a * &b).eval(th);
            let rhs = a.eval(th) * b.eval(th);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
