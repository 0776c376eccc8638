use num_traits::{One, Zero};

use super::{coh_integral, k_chi, CohClass, KClass, Rational};
use crate::error::{Error, Result};

/// A Gram matrix `g_ab` together with its exact inverse `g^ab`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingMatrix {
    g: Vec<Vec<Rational>>,
    g_inv: Vec<Vec<Rational>>,
}

impl PairingMatrix {
    pub fn new(g: Vec<Vec<Rational>>) -> Result<Self> {
        let g_inv = invert(&g)?;
        Ok(Self { g, g_inv })
    }

    pub fn size(&self) -> usize {
        self.g.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.g
    }

    pub fn inverse(&self) -> &[Vec<Rational>] {
        &self.g_inv
    }

    pub fn get(&self, a: usize, b: usize) -> &Rational {
        &self.g[a][b]
    }

    pub fn inv(&self, a: usize, b: usize) -> &Rational {
        &self.g_inv[a][b]
    }

    /// `g * g^{-1}`; the identity whenever the matrix was built through [`PairingMatrix::new`].
    pub fn product(&self) -> Vec<Vec<Rational>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &self.g[i][k] * &self.g_inv[k][j]).sum()).collect()).collect()
    }
}

/// Gauss-Jordan elimination over the rationals.
fn invert(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("pairing matrix must be square".into()));
    }
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !a[row][col].is_zero()).ok_or(Error::SingularMatrix)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                let sub = &factor * &a[col][j];
                a[row][j] -= sub;
                let sub = &factor * &inv[col][j];
                inv[row][j] -= sub;
            }
        }
    }
    Ok(inv)
}

/// The K-theoretic Poincare metric `g_ab = chi(e_a e_b)` on `P^r`.
pub fn k_metric(r: u32) -> Result<PairingMatrix> {
    if r == 0 {
        return Err(Error::InvalidArgument("k_metric needs r >= 1".into()));
    }
    let g = (0..=r).map(|a| (0..=r).map(|b| k_chi(&(&KClass::basis(r, a) * &KClass::basis(r, b)))).collect()).collect();
    PairingMatrix::new(g)
}

/// The cohomological Poincare metric `g_ab = int H^a H^b` on `P^r`.
pub fn coh_metric(r: u32) -> Result<PairingMatrix> {
    if r == 0 {
        return Err(Error::InvalidArgument("coh_metric needs r >= 1".into()));
    }
    let g = (0..=r)
        .map(|a| (0..=r).map(|b| coh_integral(&(&CohClass::basis(r, a) * &CohClass::basis(r, b)))).collect())
        .collect();
    PairingMatrix::new(g)
}
