//! Fixed-degree coefficients of the K-theoretic J-function of `P^r` and the 1-point
//! quantum K-invariants read off from them.
//!
//! For degree `d` the coefficient of `Q^d` is
//!
//! ```text
//!     J_d(q) = prod_{m=1}^{d} (1 - q^m H)^{-(r+1)}
//! ```
//!
//! and `(tau_k(gamma))_{0,1,d}` is the `q^k` coefficient of `chi(gamma * J_d(q))`.
//!
//! [`JConvention::Geometric`] is the normalization `(1-q) prod (1 - q^m H^{-1})^{-(r+1)}`
//! that equals `ev_*(1/(1 - qL))` on `M_{0,1}(P^r, d)` computed directly from the geometry of
//! the moduli space. It is not the default; it exists so the reduction engine can be checked
//! against data that is guaranteed to come from an honest sheaf on the moduli space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rings::{k_chi, k_mul, rat, series_geom_power, KClass, QSeries, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JConvention {
    /// `prod (1 - q^m H)^{-(r+1)}`.
    #[default]
    Standard,
    /// `(1 - q) prod (1 - q^m H^{-1})^{-(r+1)}`.
    Geometric,
}

/// The `Q^d` coefficient of the J-function, expanded through `q^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct JCoefficient {
    pub r: u32,
    pub d: u32,
    pub series: QSeries<KClass>,
}

pub fn j_coefficient(r: u32, d: u32, order: usize) -> JCoefficient {
    j_coefficient_with(r, d, order, JConvention::Standard)
}

pub fn j_coefficient_with(r: u32, d: u32, order: usize, convention: JConvention) -> JCoefficient {
    let bundle = match convention {
        JConvention::Standard => KClass::hyperplane(r),
        JConvention::Geometric => KClass::h_power(r, -1),
    };
    let mut series = QSeries::constant(KClass::one(r), order);
    for m in 1..=d {
        series = series.mul(&series_geom_power(m, r + 1, &bundle, order));
    }
    if convention == JConvention::Geometric && d > 0 {
        let mut factor = vec![KClass::zero(r); order + 1];
        factor[0] = KClass::one(r);
        if order >= 1 {
            factor[1] = KClass::one(r).scale(&rat(-1));
        }
        series = series.mul(&QSeries::new(factor));
    }
    JCoefficient { r, d, series }
}

impl JCoefficient {
    /// `sum_k q^k chi(gamma * [q^k] J_d)`.
    pub fn pair(&self, gamma: &KClass) -> Result<QSeries<Rational>> {
        let coeffs =
            self.series.coeffs().iter().map(|c| k_mul(gamma, c).map(|p| k_chi(&p))).collect::<Result<Vec<_>>>()?;
        Ok(QSeries::new(coeffs))
    }
}

fn check_degree(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::UnstableKey("1-point invariants need d >= 1; M_{0,1}(P^r, 0) is empty".into()));
    }
    Ok(())
}

/// The generating series `sum_k q^k (tau_k(gamma))_{0,1,d}` through `q^T`.
pub fn one_point_series(r: u32, d: u32, gamma: &KClass, order: usize) -> Result<QSeries<Rational>> {
    one_point_series_with(r, d, gamma, order, JConvention::Standard)
}

pub fn one_point_series_with(
    r: u32,
    d: u32,
    gamma: &KClass,
    order: usize,
    convention: JConvention,
) -> Result<QSeries<Rational>> {
    check_degree(d)?;
    j_coefficient_with(r, d, order, convention).pair(gamma)
}

/// `(tau_k(gamma))_{0,1,d}`.
pub fn one_point_invariant(r: u32, d: u32, k: u32, gamma: &KClass) -> Result<Rational> {
    let s = one_point_series(r, d, gamma, k as usize)?;
    Ok(s.coeff(k as usize).cloned().expect("series computed through q^k"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &QSeries<Rational>) -> Vec<Rational> {
        s.coeffs().to_vec()
    }

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn degree_zero_is_one() {
        for r in 1..=3 {
            let j = j_coefficient(r, 0, 4);
            assert_eq!(j.series.coeff(0), Some(&KClass::one(r)));
            assert!(j.series.coeffs()[1..].iter().all(KClass::is_zero));
        }
    }

    #[test]
    fn displayed_p1_series() {
        let e1 = KClass::basis(1, 1);
        assert_eq!(ints(&one_point_series(1, 1, &e1, 2).unwrap()), v(&[1, 2, 3]));
        assert_eq!(ints(&one_point_series(1, 2, &e1, 2).unwrap()), v(&[1, 2, 5]));
    }

    #[test]
    fn structure_sheaf_series_for_a_line() {
        // H = 1 + h with h^2 = 0: (1 - qH)^{-2} = sum (k+1) q^k H^k, chi(H^k) = k + 1
        let e0 = KClass::one(1);
        assert_eq!(ints(&one_point_series(1, 1, &e0, 2).unwrap()), v(&[1, 4, 9]));
    }

    #[test]
    fn single_invariants() {
        let e1 = KClass::basis(1, 1);
        assert_eq!(one_point_invariant(1, 2, 2, &e1).unwrap(), rat(5));
        assert_eq!(one_point_invariant(1, 1, 0, &e1).unwrap(), rat(1));
        assert_eq!(one_point_invariant(1, 1, 3, &e1).unwrap(), rat(4));
    }

    #[test]
    fn degree_zero_rejected() {
        let e1 = KClass::basis(1, 1);
        assert!(matches!(one_point_series(1, 0, &e1, 2), Err(Error::UnstableKey(_))));
        assert!(one_point_invariant(1, 0, 0, &e1).is_err());
    }

    #[test]
    fn e1_pairing_is_scalar_substitution() {
        // e1 * H = e1, so pairing with e1 substitutes H -> 1: prod (1 - q^m)^{-2}
        let e1 = KClass::basis(1, 1);
        for d in 1..=5u32 {
            let order = 8;
            let mut scalar = QSeries::constant(rat(1), order);
            for m in 1..=d {
                let mut f = vec![rat(0); order + 1];
                let mut n = 0usize;
                while n * m as usize <= order {
                    f[n * m as usize] = rat(n as i64 + 1);
                    n += 1;
                }
                scalar = scalar.mul(&QSeries::new(f));
            }
            assert_eq!(one_point_series(1, d, &e1, order).unwrap(), scalar, "d={d}");
        }
    }

    #[test]
    fn constant_terms_are_one() {
        let e1 = KClass::basis(1, 1);
        for d in 1..=6 {
            assert_eq!(one_point_invariant(1, d, 0, &e1).unwrap(), rat(1));
            assert_eq!(one_point_invariant(1, d, 0, &KClass::one(1)).unwrap(), rat(1));
        }
    }

    #[test]
    fn truncation_is_stable() {
        for r in 1..=2 {
            for d in 1..=3 {
                let short = j_coefficient(r, d, 4).series;
                let long = j_coefficient(r, d, 9).series;
                assert_eq!(long.truncate(4), short);
            }
        }
    }

    #[test]
    fn geometric_line_is_constant_on_points() {
        // M_{0,1}(P^1, 1) = P^1 and every power of L restricted to a fibre of ev is trivial
        let e1 = KClass::basis(1, 1);
        let s = one_point_series_with(1, 1, &e1, 5, JConvention::Geometric).unwrap();
        assert_eq!(ints(&s), v(&[1, 1, 1, 1, 1, 1]));
        // chi(O(-2k)) = 1 - 2k, since L = T^*P^1 = O(-2) there
        let s = one_point_series_with(1, 1, &KClass::one(1), 3, JConvention::Geometric).unwrap();
        assert_eq!(ints(&s), v(&[1, -1, -3, -5]));
    }
}
