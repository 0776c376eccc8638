//! Genus-0 quantum K-invariants of `P^r`, reduced to 1-point invariants.
//!
//! Rewrite rules, all exact identities of K-classes on `M_{0,n}(P^r, d)`:
//!
//! * `STRING` / `FUND-CLASS`: forget a marking carrying `tau_0(e_0)`.
//! * `TRADE-H`: `ev_p^* H = ev_j^* H (x) L_j^d (x) O(-sum d_1 D_{p,d_1|j,d_2})`, applied to
//!   `e_a = (H - 1) e_{a-1}` at `p`. The twist by `O(-E)` is expanded exactly over chain strata
//!   `C_0 - ... - C_m` (all intersections of the divisors in `E`), each contributing
//!   `(-1)^m` times the integrand restricted to the stratum with node cotangent powers
//!   `0 <= t_l < c_l`, where `c_l` is the degree on the `p` side of node `l`.
//! * `PSI-PAIR`: `L_i (x) L_j = O(D)` with `D` the sum of divisors separating `i` from `j`.
//! * `PSI-LOWER`: `L_i = O(D)` with `D` the divisors separating `i` from two other markings.
//!   Both are used in the form `L^k F = L^{k-1} F + (L^k F)|_D`, so cotangent exponents
//!   never go negative; `O_D` is expanded by inclusion-exclusion with sign `(-1)^{m+1}`.
//! * `BOUNDARY-SPLIT`: chi of a restricted integrand on a chain is contracted through the
//!   inverse K-metric at every node.
//! * `BASE-1PT` from the J-function, `BASE-D0` for `M_{0,3}(P^r, 0) = P^r`.

mod session;

pub use session::{QkSession, Strategy};

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::moduli::{canonical, is_stable, Insertion, LinComb};
use crate::rings::{KClass, Rational};

/// A quantum K-invariant `(tau_{k_1}(e_{a_1}), ..., tau_{k_n}(e_{a_n}))_{0,n,d}` of `P^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantKey {
    r: u32,
    d: u32,
    insertions: Vec<Insertion>,
}

impl InvariantKey {
    pub fn new(r: u32, d: u32, insertions: Vec<Insertion>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("target must be P^r with r >= 1".into()));
        }
        if let Some(bad) = insertions.iter().find(|i| i.class > r) {
            return Err(Error::InvalidArgument(format!("basis class e{} does not exist on P^{r}", bad.class)));
        }
        Ok(Self { r, d, insertions: canonical(insertions) })
    }

    pub(crate) fn from_canonical(r: u32, d: u32, insertions: Vec<Insertion>) -> Self {
        Self { r, d, insertions: canonical(insertions) }
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

    /// Insertions sorted descending by `(psi, class)`.
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
}

impl fmt::Display for InvariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, ins) in self.insertions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_k_insertion(f, ins)?;
        }
        write!(f, ") @ d={}", self.d)
    }
}

pub(crate) fn write_k_insertion(f: &mut impl fmt::Write, ins: &Insertion) -> fmt::Result {
    if ins.psi > 0 {
        write!(f, "L^{}*", ins.psi)?;
    }
    write!(f, "e{}", ins.class)
}

/// Expands classes into the `e_a` basis by multilinearity.
pub fn normalize(d: u32, raw: &[(u32, KClass)]) -> Result<LinComb<InvariantKey>> {
    let r = match raw.first() {
        Some((_, c)) => c.dim(),
        None => return Err(Error::InvalidArgument("an invariant needs at least one insertion".into())),
    };
    if let Some((_, c)) = raw.iter().find(|(_, c)| c.dim() != r) {
        return Err(Error::DimensionMismatch { left: r, right: c.dim() });
    }
    let mut partial: Vec<(Vec<Insertion>, Rational)> = vec![(Vec::new(), Rational::one())];
    for (psi, class) in raw {
        let mut next = Vec::new();
        for (prefix, w) in &partial {
            for (a, c) in class.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut ins = prefix.clone();
                ins.push(Insertion::new(*psi, a as u32));
                next.push((ins, w * c));
            }
        }
        partial = next;
    }
    let mut out = LinComb::new();
    for (ins, w) in partial {
        out.add(InvariantKey::new(r, d, ins)?, w);
    }
    Ok(out)
}
