//! Exact arithmetic on the two truncated rings attached to `P^r`.
//!
//! * [`CohClass`]: `H^*(P^r) = Q[H]/(H^{r+1})`, stored in the monomial basis `1, H, ..., H^r`.
//! * [`KClass`]: `K(P^r) = Q[H]/((H-1)^{r+1})`, stored in the basis `e_a = (H-1)^a`.
//!
//! In the `e_a` basis the K-ring is again a truncated polynomial ring (in `e_1`), so both
//! classes share one multiplication kernel. Every coefficient is a [`Rational`]; nothing in
//! this crate touches floating point.

mod metric;
mod series;

pub use metric::{coh_metric, k_metric, PairingMatrix};
pub use series::{series_geom_power, QSeries, SeriesCoeff};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `C(n, k)` as a rational, zero outside `0 <= k <= n`.
pub fn binom(n: u64, k: u64) -> Rational {
    if k > n {
        return Rational::zero();
    }
    Rational::from_integer(binomial(BigInt::from(n), BigInt::from(k)))
}

/// Product in `Q[x]/(x^{len})`.
fn truncated_product(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let len = a.len();
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn check_dims(left: u32, right: u32) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

fn fmt_linear(f: &mut fmt::Formatter<'_>, coeffs: &[Rational], atom: impl Fn(usize) -> String) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        first = false;
        if mag.is_one() {
            write!(f, "{}", atom(i))?;
        } else {
            write!(f, "{}*{}", mag, atom(i))?;
        }
    }
    if first {
        write!(f, "0*{}", atom(0))?;
    }
    Ok(())
}

macro_rules! truncated_class {
    ($name:ident) => {
        impl $name {
            /// Dimension `r` of the underlying projective space.
            pub fn dim(&self) -> u32 {
                (self.coeffs.len() - 1) as u32
            }

            pub fn coeffs(&self) -> &[Rational] {
                &self.coeffs
            }

            /// Coefficient of the `i`-th basis element, zero past the top.
            pub fn coeff(&self, i: usize) -> Rational {
                self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
            }

            pub fn zero(r: u32) -> Self {
                Self { coeffs: vec![Rational::zero(); r as usize + 1] }
            }

            pub fn one(r: u32) -> Self {
                Self::basis(r, 0)
            }

            /// The `i`-th basis element; zero when `i > r`.
            pub fn basis(r: u32, i: u32) -> Self {
                let mut out = Self::zero(r);
                if i <= r {
                    out.coeffs[i as usize] = Rational::one();
                }
                out
            }

            pub fn from_coeffs(coeffs: Vec<Rational>) -> Result<Self> {
                if coeffs.len() < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "a class on P^r needs r+1 >= 2 coefficients, got {}",
                        coeffs.len()
                    )));
                }
                Ok(Self { coeffs })
            }

            pub fn is_zero(&self) -> bool {
                self.coeffs.iter().all(Zero::is_zero)
            }

            pub fn scale(&self, c: &Rational) -> Self {
                Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
            }

            pub fn checked_add(&self, other: &Self) -> Result<Self> {
                check_dims(self.dim(), other.dim())?;
                Ok(Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
            }

            pub fn checked_mul(&self, other: &Self) -> Result<Self> {
                check_dims(self.dim(), other.dim())?;
                Ok(Self { coeffs: truncated_product(&self.coeffs, &other.coeffs) })
            }

            pub fn pow(&self, k: u32) -> Self {
                let mut out = Self::one(self.dim());
                for _ in 0..k {
                    out = &out * self;
                }
                out
            }
        }

        impl Add<&$name> for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                self.checked_add(rhs).expect("dimension mismatch")
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                &self + &rhs
            }
        }

        impl Sub<&$name> for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                self + &(-rhs)
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                &self - &rhs
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                $name { coeffs: self.coeffs.iter().map(|c| -c).collect() }
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                -&self
            }
        }

        impl Mul<&$name> for &$name {
            type Output = $name;
            fn mul(self, rhs: &$name) -> $name {
                self.checked_mul(rhs).expect("dimension mismatch")
            }
        }

        impl Mul for $name {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                &self * &rhs
            }
        }
    };
}

/// A class in `H^*(P^r)`; `coeffs[k]` multiplies `H^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CohClass {
    coeffs: Vec<Rational>,
}

truncated_class!(CohClass);

impl CohClass {
    pub fn hyperplane(r: u32) -> Self {
        Self::basis(r, 1)
    }
}

impl fmt::Display for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_linear(f, &self.coeffs, |k| match k {
            0 => "1".to_string(),
            1 => "H".to_string(),
            k => format!("H^{k}"),
        })
    }
}

/// A class in `K(P^r)`; `coeffs[a]` multiplies `e_a = (H-1)^a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KClass {
    coeffs: Vec<Rational>,
}

truncated_class!(KClass);

impl KClass {
    /// The hyperplane bundle `H = O(1) = e_0 + e_1`.
    pub fn hyperplane(r: u32) -> Self {
        Self::h_power(r, 1)
    }

    /// `H^k` for any integer `k`, via `(1 + e_1)^k` in the nilpotent variable `e_1`.
    pub fn h_power(r: u32, k: i64) -> Self {
        // generalized binomial C(k, a) = k (k-1) ... (k-a+1) / a!
        let mut coeffs = Vec::with_capacity(r as usize + 1);
        let mut c = Rational::one();
        for a in 0..=r as i64 {
            coeffs.push(c.clone());
            c = c * rat(k - a) / rat(a + 1);
        }
        Self { coeffs }
    }

    /// Coefficients in the monomial basis `1, H, ..., H^r`.
    pub fn to_h_powers(&self) -> Vec<Rational> {
        // e_a = (H - 1)^a = sum_i C(a, i) (-1)^{a-i} H^i
        let r = self.dim() as u64;
        let mut out = vec![Rational::zero(); r as usize + 1];
        for (a, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, slot) in out.iter_mut().enumerate().take(a + 1) {
                let term = binom(a as u64, i as u64) * c;
                if (a - i) % 2 == 0 {
                    *slot += term;
                } else {
                    *slot -= term;
                }
            }
        }
        out
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_linear(f, &self.coeffs, |a| format!("e{a}"))
    }
}

/// Cup product in `H^*(P^r)`, truncated at `H^{r+1} = 0`.
pub fn coh_mul(a: &CohClass, b: &CohClass) -> Result<CohClass> {
    a.checked_mul(b)
}

/// Degree of the top-dimensional part: the coefficient of `H^r`.
pub fn coh_integral(a: &CohClass) -> Rational {
    a.coeffs.last().cloned().unwrap_or_else(Rational::zero)
}

/// Tensor product in `K(P^r)`, reduced modulo `(H-1)^{r+1}`.
pub fn k_mul(a: &KClass, b: &KClass) -> Result<KClass> {
    a.checked_mul(b)
}

/// Holomorphic Euler characteristic, using `chi(O(k)) = C(k+r, r)` on each `H^k`.
pub fn k_chi(a: &KClass) -> Rational {
    let r = a.dim() as u64;
    a.to_h_powers().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| c * binom(k as u64 + r, r)).sum()
}
