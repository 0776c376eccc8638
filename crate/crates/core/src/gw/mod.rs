//! Genus-0 Gromov-Witten invariants of `P^r`.
//!
//! Two independent routes:
//!
//! * [`kontsevich_n`]: the closed recursion for the number `N_d` of rational plane curves of
//!   degree `d` through `3d - 1` general points.
//! * [`GwSession`]: a reduction engine on `<tau_{l_1}(H^{k_1}), ...>_{0,n,d}` using the
//!   divisor trade (three-marking form for primary invariants, cotangent form otherwise),
//!   `psi_p = D_{p|jk}`, `psi_p + psi_j = D_{p|j}`, the string and divisor axioms and
//!   splitting through the diagonal `sum_a H^a (x) H^{r-a}`. Primary invariants need no
//!   external data; descendants bottom out in an [`OracleTable`] of 1-point invariants.

mod oracle;
mod session;

pub use oracle::{load_oracle, OracleTable};
pub use session::GwSession;

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::moduli::{canonical, is_stable, Insertion};
use crate::rings::{binom, rat, Rational};

/// `<tau_{l_1}(H^{k_1}), ..., tau_{l_n}(H^{k_n})>_{0,n,d}` on `P^r`.
///
/// [`Insertion::psi`] is `l` and [`Insertion::class`] is `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GwKey {
    r: u32,
    d: u32,
    insertions: Vec<Insertion>,
}

impl GwKey {
    pub fn new(r: u32, d: u32, insertions: Vec<Insertion>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("target must be P^r with r >= 1".into()));
        }
        if let Some(bad) = insertions.iter().find(|i| i.class > r) {
            return Err(Error::InvalidArgument(format!("H^{} vanishes on P^{r}", bad.class)));
        }
        Ok(Self { r, d, insertions: canonical(insertions) })
    }

    pub(crate) fn from_canonical(r: u32, d: u32, insertions: Vec<Insertion>) -> Self {
        Self { r, d, insertions: canonical(insertions) }
    }

    /// `N_d = <H^2, ..., H^2>_{0,3d-1,d}` on `P^2`.
    pub fn plane_curves(d: u32) -> Self {
        Self::from_canonical(2, d, vec![Insertion::new(0, 2); (3 * d - 1) as usize])
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.insertions.len()
    }

    pub fn insertions(&self) -> &[Insertion] {
        &self.insertions
    }

    pub fn is_stable(&self) -> bool {
        is_stable(self.n(), self.d)
    }

    pub fn check_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::UnstableKey(format!("{self} (n={}, d={})", self.n(), self.d)))
        }
    }

    /// `dim M_{0,n}(P^r, d) = r + (r+1) d + n - 3`.
    pub fn virtual_dimension(&self) -> i64 {
        self.r as i64 + (self.r as i64 + 1) * self.d as i64 + self.n() as i64 - 3
    }

    pub fn insertion_degree(&self) -> i64 {
        self.insertions.iter().map(|i| i.weight() as i64).sum()
    }

    pub fn satisfies_dimension(&self) -> bool {
        self.virtual_dimension() == self.insertion_degree()
    }

    pub fn is_primary(&self) -> bool {
        self.insertions.iter().all(|i| i.psi == 0)
    }
}

impl fmt::Display for GwKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, ins) in self.insertions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_h_insertion(f, ins)?;
        }
        write!(f, ") @ d={}", self.d)
    }
}

pub(crate) fn write_h_insertion(f: &mut impl fmt::Write, ins: &Insertion) -> fmt::Result {
    if ins.psi > 0 {
        write!(f, "L^{}*", ins.psi)?;
    }
    match ins.class {
        0 => f.write_str("1"),
        1 => f.write_str("H"),
        k => write!(f, "H^{k}"),
    }
}

/// `N_d` from the closed recursion with `N_1 = 1`.
pub fn kontsevich_n(d: u32) -> Result<Rational> {
    if d == 0 {
        return Err(Error::InvalidArgument("N_d needs d >= 1".into()));
    }
    Ok(NTable::up_to(d).get(d).expect("table covers d").clone())
}

/// `N_1, ..., N_D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NTable {
    values: Vec<Rational>,
}

impl NTable {
    pub fn up_to(max: u32) -> Self {
        let mut values: Vec<Rational> = Vec::with_capacity(max as usize);
        for d in 1..=max as u64 {
            if d == 1 {
                values.push(rat(1));
                continue;
            }
            let mut n = Rational::zero();
            for d1 in 1..d {
                let d2 = d - d1;
                let (a, b) = (rat(d1 as i64), rat(d2 as i64));
                let weight =
                    &a * &a * &b * &b * binom(3 * d - 4, 3 * d1 - 2) - &a * &a * &a * &b * binom(3 * d - 4, 3 * d1 - 1);
                n += &values[d1 as usize - 1] * &values[d2 as usize - 1] * weight;
            }
            values.push(n);
        }
        Self { values }
    }

    pub fn get(&self, d: u32) -> Option<&Rational> {
        self.values.get((d as usize).checked_sub(1)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.values.iter().enumerate().map(|(i, v)| (i as u32 + 1, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_plane_curve_counts() {
        let t = NTable::up_to(6);
        let got: Vec<String> = t.iter().map(|(_, v)| v.to_string()).collect();
        assert_eq!(got, ["1", "1", "12", "620", "87304", "26312976"]);
        assert!(kontsevich_n(0).is_err());
        assert_eq!(kontsevich_n(3).unwrap(), rat(12));
    }

    #[test]
    fn key_dimension() {
        let k = GwKey::plane_curves(2);
        assert_eq!(k.n(), 5);
        assert!(k.satisfies_dimension());
        assert_eq!(k.to_string(), "(H^2, H^2, H^2, H^2, H^2) @ d=2");
        let k = GwKey::new(2, 1, vec![Insertion::new(1, 1), Insertion::new(0, 0)]).unwrap();
        assert_eq!(k.to_string(), "(L^1*H, 1) @ d=1");
        assert!(!k.satisfies_dimension());
    }
}
