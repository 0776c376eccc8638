#![allow(dead_code)]

use num_traits::{One, Zero};
use qgw_core::gw::{GwKey, OracleTable};
use qgw_core::moduli::Insertion;
use qgw_core::qk::InvariantKey;
use qgw_core::rings::{binom, rat, Rational};

/// Descendant 1-point invariants of `P^r` from the closed formula
/// `<tau_l H^k>_d = [x^{r-k}] prod_{m=1}^d m^{-(r+1)} (1 + x/m)^{-(r+1)}`,
/// nonzero only for `l = (r+1)d + r - k - 2`.
pub fn one_point_table(r: u32, max_d: u32) -> OracleTable {
    let n = r as usize + 1;
    let mut table = OracleTable::new(r);
    for d in 1..=max_d {
        let mut c = vec![Rational::zero(); n];
        c[0] = Rational::one();
        for m in 1..=d {
            let f: Vec<Rational> = (0..n)
                .map(|j| {
                    let sign = if j % 2 == 0 { rat(1) } else { rat(-1) };
                    sign * binom(j as u64 + r as u64, j as u64) / rat(m as i64).pow(j as i32 + r as i32 + 1)
                })
                .collect();
            let mut g = vec![Rational::zero(); n];
            for a in 0..n {
                for b in 0..n - a {
                    g[a + b] += &c[a] * &f[b];
                }
            }
            c = g;
        }
        for k in 0..=r {
            let l = (r + 1) as i64 * d as i64 + r as i64 - k as i64 - 2;
            if l >= 0 {
                table.insert(d, l as u32, k, c[(r - k) as usize].clone()).unwrap();
            }
        }
    }
    table
}

/// All weakly decreasing insertion lists of length `n`.
pub fn insertion_lists(n: usize, max_psi: u32, max_class: u32) -> Vec<Vec<Insertion>> {
    fn rec(cur: &mut Vec<Insertion>, n: usize, max_psi: u32, max_class: u32, out: &mut Vec<Vec<Insertion>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for psi in 0..=max_psi {
            for class in 0..=max_class {
                let ins = Insertion::new(psi, class);
                if cur.last().is_some_and(|last| ins > *last) {
                    continue;
                }
                cur.push(ins);
                rec(cur, n, max_psi, max_class, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, max_psi, max_class, &mut out);
    out
}

/// Stable K-theoretic keys of `P^1` with `d <= max_d`, `n <= max_n`, psi powers `<= max_psi`.
pub fn qk_keys(max_d: u32, max_n: usize, max_psi: u32) -> Vec<InvariantKey> {
    let mut keys = Vec::new();
    for d in 0..=max_d {
        for n in 1..=max_n {
            for ins in insertion_lists(n, max_psi, 1) {
                let k = InvariantKey::new(1, d, ins).unwrap();
                if k.is_stable() {
                    keys.push(k);
                }
            }
        }
    }
    keys
}

/// Stable, dimensionally admissible cohomological keys of `P^2`.
pub fn gw_keys(max_d: u32, max_n: usize, max_psi: u32) -> Vec<GwKey> {
    let mut keys = Vec::new();
    for d in 0..=max_d {
        for n in 1..=max_n {
            for ins in insertion_lists(n, max_psi, 2) {
                let k = GwKey::new(2, d, ins).unwrap();
                if k.is_stable() && k.satisfies_dimension() {
                    keys.push(k);
                }
            }
        }
    }
    keys
}
