//! 1-point data checked against Hirzebruch-Riemann-Roch computed in cohomology.

use num_traits::{One, Zero};
use qgw_core::jfunction::{j_coefficient, one_point_invariant, one_point_series, one_point_series_with, JConvention};
use qgw_core::rings::{binom, rat, KClass, Rational};

type Poly = Vec<Rational>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let n = a.len();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

fn factorial(i: usize) -> Rational {
    (1..=i as i64).map(rat).product()
}

/// `exp(c h)` modulo `h^n`.
fn exp(c: i64, n: usize) -> Poly {
    (0..n).map(|i| rat(c).pow(i as i32) / factorial(i)).collect()
}

/// Todd class of `P^r`: `(h / (1 - e^{-h}))^{r+1}`.
fn todd(r: usize) -> Poly {
    let n = r + 1;
    // (1 - e^{-h}) / h, then invert
    let f: Poly = (0..n).map(|i| rat(if i % 2 == 0 { 1 } else { -1 }) / factorial(i + 1)).collect();
    let mut inv = vec![Rational::zero(); n];
    inv[0] = Rational::one();
    for i in 1..n {
        let s: Rational = (1..=i).map(|j| &f[j] * &inv[i - j]).sum();
        inv[i] = -s;
    }
    let mut out = vec![Rational::zero(); n];
    out[0] = Rational::one();
    for _ in 0..n {
        out = mul(&out, &inv);
    }
    out
}

fn chi(ch: &Poly) -> Rational {
    let r = ch.len() - 1;
    mul(ch, &todd(r))[r].clone()
}

/// Chern character of `e_a = (O(1) - 1)^a`.
fn ch_basis(r: usize, a: u32) -> Poly {
    let mut e1 = exp(1, r + 1);
    e1[0] -= Rational::one();
    let mut out = exp(0, r + 1);
    for _ in 0..a {
        out = mul(&out, &e1);
    }
    out
}

/// `q^k` coefficients of `chi(e_a * J_d)`, with `J_d` expanded as a sum of line bundles.
fn hrr_series(r: usize, d: u32, a: u32, order: usize, convention: JConvention) -> Vec<Rational> {
    let sign = match convention {
        JConvention::Standard => 1,
        JConvention::Geometric => -1,
    };
    let zero = vec![Rational::zero(); r + 1];
    let mut series = vec![zero.clone(); order + 1];
    series[0] = exp(0, r + 1);
    for m in 1..=d as usize {
        // (1 - q^m X)^{-(r+1)} = sum_j C(j+r, r) q^{mj} X^j
        let mut next = vec![zero.clone(); order + 1];
        for (k, c) in series.iter().enumerate() {
            let mut j = 0;
            while k + m * j <= order {
                let w = binom((j + r) as u64, r as u64);
                let term: Poly = mul(c, &exp(sign * j as i64, r + 1)).iter().map(|x| x * &w).collect();
                for (t, x) in next[k + m * j].iter_mut().zip(term) {
                    *t += x;
                }
                j += 1;
            }
        }
        series = next;
    }
    if convention == JConvention::Geometric {
        for k in (1..=order).rev() {
            let prev = series[k - 1].clone();
            for (t, x) in series[k].iter_mut().zip(prev) {
                *t -= x;
            }
        }
    }
    series.iter().map(|c| chi(&mul(c, &ch_basis(r, a)))).collect()
}

#[test]
fn line_degree_one_and_two() {
    let e1 = KClass::basis(1, 1);
    let s1 = one_point_series(1, 1, &e1, 2).unwrap();
    assert_eq!(s1.coeffs(), &[rat(1), rat(2), rat(3)]);
    let s2 = one_point_series(1, 2, &e1, 2).unwrap();
    assert_eq!(s2.coeffs(), &[rat(1), rat(2), rat(5)]);
    assert_eq!(one_point_invariant(1, 2, 2, &e1).unwrap(), rat(5));
}

#[test]
fn matches_riemann_roch() {
    for convention in [JConvention::Standard, JConvention::Geometric] {
        for r in 1..=3u32 {
            for d in 1..=3 {
                for a in 0..=r {
                    let got = one_point_series_with(r, d, &KClass::basis(r, a), 7, convention).unwrap();
                    let want = hrr_series(r as usize, d, a, 7, convention);
                    assert_eq!(got.coeffs(), &want[..], "{convention:?} r={r} d={d} e{a}");
                }
            }
        }
    }
}

#[test]
fn degree_zero_has_no_one_point_invariants() {
    assert!(one_point_series(1, 0, &KClass::one(1), 3).is_err());
    assert_eq!(j_coefficient(2, 0, 3).series.coeffs()[0], KClass::one(2));
}
