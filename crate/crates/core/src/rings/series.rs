use num_traits::{One, Zero};

use super::{binom, CohClass, KClass, Rational};

/// Coefficient ring for a truncated power series.
pub trait SeriesCoeff: Clone + PartialEq + std::fmt::Debug {
    /// The additive identity of the ring `self` lives in.
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn coeff_add(&self, other: &Self) -> Self;
    fn coeff_mul(&self, other: &Self) -> Self;
    fn coeff_scale(&self, c: &Rational) -> Self;
    fn coeff_is_zero(&self) -> bool;
}

impl SeriesCoeff for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn coeff_add(&self, other: &Self) -> Self {
        self + other
    }
    fn coeff_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn coeff_scale(&self, c: &Rational) -> Self {
        self * c
    }
    fn coeff_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

macro_rules! class_coeff {
    ($t:ty) => {
        impl SeriesCoeff for $t {
            fn zero_like(&self) -> Self {
                <$t>::zero(self.dim())
            }
            fn one_like(&self) -> Self {
                <$t>::one(self.dim())
            }
            fn coeff_add(&self, other: &Self) -> Self {
                self + other
            }
            fn coeff_mul(&self, other: &Self) -> Self {
                self * other
            }
            fn coeff_scale(&self, c: &Rational) -> Self {
                <$t>::scale(self, c)
            }
            fn coeff_is_zero(&self) -> bool {
                <$t>::is_zero(self)
            }
        }
    };
}

class_coeff!(KClass);
class_coeff!(CohClass);

/// A power series in one variable known exactly through `q^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<C> {
    coeffs: Vec<C>,
}

impl<C: SeriesCoeff> QSeries<C> {
    /// Builds a series from coefficients of `q^0 .. q^T`; `coeffs` must be nonempty.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        Self { coeffs }
    }

    pub fn constant(c: C, order: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The coefficient of `q^k`, or `None` past the truncation order.
    pub fn coeff(&self, k: usize) -> Option<&C> {
        self.coeffs.get(k)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { coeffs: self.coeffs[..=order.min(self.order())].to_vec() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self { coeffs: (0..=order).map(|k| self.coeffs[k].coeff_add(&other.coeffs[k])).collect() }
    }

    /// Cauchy product, known through the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![self.coeffs[0].zero_like(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.coeff_is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] = coeffs[i + j].coeff_add(&a.coeff_mul(b));
            }
        }
        Self { coeffs }
    }

    pub fn map<D: SeriesCoeff>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

/// Expansion of `(1 - q^m * scalar)^(-exponent)` through `q^order`.
pub fn series_geom_power(m: u32, exponent: u32, scalar: &KClass, order: usize) -> QSeries<KClass> {
    assert!(m >= 1, "the q-exponent m must be positive");
    let mut coeffs = vec![scalar.zero_like(); order + 1];
    let mut power = scalar.one_like();
    let mut n = 0u64;
    while (n as usize) * (m as usize) <= order {
        // C(n + e - 1, n) for the n-th term of the negative binomial series
        let c = if exponent == 0 {
            if n == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }
        } else {
            binom(n + exponent as u64 - 1, n)
        };
        coeffs[n as usize * m as usize] = power.coeff_scale(&c);
        power = &power * scalar;
        n += 1;
    }
    QSeries { coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::rat;
    use proptest::prelude::*;

    fn rseries(v: &[i64]) -> QSeries<Rational> {
        QSeries::new(v.iter().map(|&x| rat(x)).collect())
    }

    #[test]
    fn binomial_series() {
        let one = KClass::one(1);
        let s = series_geom_power(1, 2, &one, 2);
        assert_eq!(s.coeffs(), &[KClass::one(1), one.scale(&rat(2)), one.scale(&rat(3))]);
    }

    #[test]
    fn geometric_in_q_squared() {
        let h = KClass::hyperplane(1);
        let s = series_geom_power(2, 1, &h, 2);
        assert_eq!(s.coeffs(), &[KClass::one(1), KClass::zero(1), h]);
    }

    #[test]
    fn squared_hyperplane_series() {
        let h = KClass::hyperplane(1);
        let s = series_geom_power(1, 2, &h, 1);
        assert_eq!(s.coeffs(), &[KClass::one(1), h.scale(&rat(2))]);
    }

    #[test]
    fn mixed_orders_use_the_minimum() {
        let a = rseries(&[1, 1, 1, 1]);
        let b = rseries(&[1, 2]);
        assert_eq!(a.mul(&b).order(), 1);
        assert_eq!(a.add(&b), rseries(&[2, 3]));
        assert!(a.mul(&b).coeff(2).is_none());
    }

    fn naive_convolution(a: &[i64], b: &[i64], order: usize) -> Vec<Rational> {
        (0..=order).map(|k| (0..=k).map(|i| rat(a[i]) * rat(b[k - i])).sum()).collect()
    }

    proptest! {
        #[test]
        fn product_matches_naive_convolution(
            a in prop::collection::vec(-20i64..20, 17),
            b in prop::collection::vec(-20i64..20, 17),
            order in 0usize..=16,
        ) {
            let sa = QSeries::new(a[..=order].iter().map(|&x| rat(x)).collect());
            let sb = QSeries::new(b[..=order].iter().map(|&x| rat(x)).collect());
            let expected = naive_convolution(&a, &b, order);
            prop_assert_eq!(sa.mul(&sb).coeffs().to_vec(), expected);
        }
    }
}
