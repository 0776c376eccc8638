//! Combinatorics of genus-0 stable maps shared by both engines: marked-point insertions,
//! stability, and enumeration of chain-type boundary strata.
//!
//! A boundary stratum separating a marking `p` from a set of markings `T` is a chain of
//! components `C_0 - C_1 - ... - C_m` with `p` on `C_0` and `T` on `C_m`. The other markings
//! are distributed over the components; identical insertions are grouped and counted with
//! multinomial multiplicities rather than enumerated one subset at a time.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rings::{binom, Rational};

/// `tau_psi(basis_class)` at one marked point.
///
/// In quantum K-theory `class` indexes `e_a = (H-1)^a` and `psi` is the power of the cotangent
/// line bundle; in cohomology `class` is the power of `H` and `psi` the power of the psi-class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Insertion {
    pub psi: u32,
    pub class: u32,
}

impl Insertion {
    pub const fn new(psi: u32, class: u32) -> Self {
        Self { psi, class }
    }

    pub fn weight(&self) -> u32 {
        self.psi + self.class
    }
}

/// Stability of `M_{0,n}(P^r, d)` with the convention that positive degree needs a marking.
pub fn is_stable(n: usize, d: u32) -> bool {
    if d == 0 {
        n >= 3
    } else {
        n >= 1
    }
}

/// Stability of a component carrying `special` points (markings plus nodes).
fn component_stable(special: usize, d: u32) -> bool {
    d > 0 || special >= 3
}

/// Sorts insertions into canonical (descending) order.
pub fn canonical(mut ins: Vec<Insertion>) -> Vec<Insertion> {
    ins.sort_unstable_by(|a, b| b.cmp(a));
    ins
}

/// Groups a canonical insertion list into `(insertion, multiplicity)` pairs.
pub fn group(ins: &[Insertion]) -> Vec<(Insertion, usize)> {
    let mut out: Vec<(Insertion, usize)> = Vec::new();
    for &i in ins {
        match out.last_mut() {
            Some((last, c)) if *last == i => *c += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// A linear combination with exact weights; zero weights are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for LinComb<K> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(key: K) -> Self {
        let mut out = Self::new();
        out.add(key, Rational::one());
        out
    }

    pub fn add(&mut self, key: K, weight: Rational) {
        if weight.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *entry += weight;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight(&self, key: &K) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::new();
        for (k, w) in &self.terms {
            out.add(k.clone(), w * c);
        }
        out
    }

    pub fn extend(&mut self, other: &Self) {
        for (k, w) in &other.terms {
            self.add(k.clone(), w.clone());
        }
    }
}

/// One component of a boundary stratum; node insertions are added at evaluation time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Component {
    pub degree: u32,
    pub markings: Vec<Insertion>,
}

/// A chain stratum `C_0 - ... - C_m` with a cotangent power attached to each node.
///
/// `node_psi[l]` is the power carried by *both* branches of the node joining `C_l` and `C_{l+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stratum {
    pub components: Vec<Component>,
    pub node_psi: Vec<u32>,
}

impl Stratum {
    pub fn nodes(&self) -> usize {
        self.node_psi.len()
    }

    /// Insertions of component `l` including its node branches, for node classes
    /// `left` (shared with `C_{l-1}`) and `right` (shared with `C_{l+1}`).
    pub fn component_insertions(&self, l: usize, left: Option<u32>, right: Option<u32>) -> Vec<Insertion> {
        let mut ins = self.components[l].markings.clone();
        if let Some(a) = left {
            ins.push(Insertion::new(self.node_psi[l - 1], a));
        }
        if let Some(a) = right {
            ins.push(Insertion::new(self.node_psi[l], a));
        }
        canonical(ins)
    }
}

/// What a chain must look like: `left` markings on `C_0`, `right` markings on `C_m`.
#[derive(Clone, Debug)]
pub struct ChainSpec<'a> {
    pub degree: u32,
    pub left: &'a [Insertion],
    pub right: &'a [Insertion],
    pub others: &'a [(Insertion, usize)],
    /// Lower bound on the degree of `C_0`.
    pub min_first_degree: u32,
    /// Upper bound on the number of nodes; `1` restricts to boundary divisors.
    pub max_nodes: usize,
}

/// One chain shape with its multiplicity (number of marking assignments it stands for).
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub components: Vec<Component>,
    pub multiplicity: Rational,
}

impl Chain {
    pub fn nodes(&self) -> usize {
        self.components.len() - 1
    }

    /// Degree accumulated on the `C_0` side of each node.
    pub fn left_degrees(&self) -> Vec<u32> {
        let mut acc = 0;
        self.components[..self.components.len() - 1]
            .iter()
            .map(|c| {
                acc += c.degree;
                acc
            })
            .collect()
    }
}

fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in weak_compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(total: usize, parts: &[u32]) -> Rational {
    let mut out = Rational::one();
    let mut left = total as u64;
    for &p in parts {
        out *= binom(left, p as u64);
        left -= p as u64;
    }
    out
}

/// All stable chains matching `spec`, grouped by marking multiplicities.
pub fn enumerate_chains(spec: &ChainSpec<'_>) -> Vec<Chain> {
    let total_others: usize = spec.others.iter().map(|(_, c)| c).sum();
    let mut out = Vec::new();
    // every interior component needs a marking or positive degree
    let max_m = spec.max_nodes.min(spec.degree as usize + total_others + 1);
    for m in 1..=max_m {
        let parts = m + 1;
        for degrees in weak_compositions(spec.degree, parts) {
            if degrees[0] < spec.min_first_degree {
                continue;
            }
            let mut buckets: Vec<Vec<Insertion>> = vec![Vec::new(); parts];
            distribute(spec, &degrees, 0, &mut buckets, Rational::one(), &mut out);
        }
    }
    out
}

fn distribute(
    spec: &ChainSpec<'_>,
    degrees: &[u32],
    type_idx: usize,
    buckets: &mut Vec<Vec<Insertion>>,
    mult: Rational,
    out: &mut Vec<Chain>,
) {
    let parts = degrees.len();
    if type_idx == spec.others.len() {
        let m = parts - 1;
        let stable = (0..parts).all(|l| {
            let fixed = if l == 0 { spec.left.len() } else { 0 } + if l == m { spec.right.len() } else { 0 };
            let nodes = if l == 0 || l == m { 1 } else { 2 };
            component_stable(fixed + buckets[l].len() + nodes, degrees[l])
        });
        if !stable {
            return;
        }
        let components = (0..parts)
            .map(|l| {
                let mut markings = buckets[l].clone();
                if l == 0 {
                    markings.extend_from_slice(spec.left);
                }
                if l == m {
                    markings.extend_from_slice(spec.right);
                }
                Component { degree: degrees[l], markings: canonical(markings) }
            })
            .collect();
        out.push(Chain { components, multiplicity: mult });
        return;
    }
    let (ins, count) = spec.others[type_idx];
    for split in weak_compositions(count as u32, parts) {
        for (l, &c) in split.iter().enumerate() {
            buckets[l].extend(std::iter::repeat_n(ins, c as usize));
        }
        distribute(spec, degrees, type_idx + 1, buckets, &mult * multinomial(count, &split), out);
        for (l, &c) in split.iter().enumerate() {
            let len = buckets[l].len();
            buckets[l].truncate(len - c as usize);
        }
    }
}

/// Ways to assign a cotangent power in `0..bound[l]` to every node.
pub fn node_powers(bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..b).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// Text of a stratum, e.g. `[(e0, N) @ d=1 -- (L^2*e1, N) @ d=1]`; `N` marks a node branch.
pub(crate) fn render_stratum(s: &Stratum, write_ins: impl Fn(&mut String, &Insertion)) -> String {
    let mut out = String::from("[");
    let m = s.nodes();
    for (l, c) in s.components.iter().enumerate() {
        if l > 0 {
            out.push_str(" -- ");
        }
        out.push('(');
        let mut first = true;
        let mut sep = |out: &mut String| {
            if !first {
                out.push_str(", ");
            }
            first = false;
        };
        for ins in &c.markings {
            sep(&mut out);
            write_ins(&mut out, ins);
        }
        let mut node = |out: &mut String, psi: u32| {
            sep(out);
            if psi > 0 {
                out.push_str(&format!("L^{psi}*"));
            }
            out.push('N');
        };
        if l > 0 {
            node(&mut out, s.node_psi[l - 1]);
        }
        if l < m {
            node(&mut out, s.node_psi[l]);
        }
        out.push_str(&format!(") @ d={}", c.degree));
    }
    out.push(']');
    out
}

/// Which reduction a step applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "FUND-CLASS")]
    FundClass,
    #[serde(rename = "STRING")]
    String,
    #[serde(rename = "DIVISOR")]
    Divisor,
    #[serde(rename = "TRADE-H")]
    TradeH,
    #[serde(rename = "TRADE-H3")]
    TradeThreePoint,
    #[serde(rename = "PSI-PAIR")]
    PsiPair,
    #[serde(rename = "PSI-LOWER")]
    PsiLower,
    #[serde(rename = "BOUNDARY-SPLIT")]
    BoundarySplit,
    #[serde(rename = "BASE-1PT")]
    BaseOnePoint,
    #[serde(rename = "BASE-2PT")]
    BaseTwoPoint,
    #[serde(rename = "BASE-D0")]
    BaseDegreeZero,
    #[serde(rename = "DIMENSION")]
    Dimension,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::FundClass => "FUND-CLASS",
            Rule::String => "STRING",
            Rule::Divisor => "DIVISOR",
            Rule::TradeH => "TRADE-H",
            Rule::TradeThreePoint => "TRADE-H3",
            Rule::PsiPair => "PSI-PAIR",
            Rule::PsiLower => "PSI-LOWER",
            Rule::BoundarySplit => "BOUNDARY-SPLIT",
            Rule::BaseOnePoint => "BASE-1PT",
            Rule::BaseTwoPoint => "BASE-2PT",
            Rule::BaseDegreeZero => "BASE-D0",
            Rule::Dimension => "DIMENSION",
        };
        f.write_str(s)
    }
}

/// Deterministic choice among `n` options, seeded by a hashable context.
pub(crate) fn seeded_choice<T: std::hash::Hash>(seed: u64, context: &T, n: usize) -> usize {
    use std::hash::Hasher;
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 ^= *b as u64;
                self.0 = self.0.wrapping_mul(0x100000001b3);
            }
        }
    }
    let mut h = Fnv(0xcbf29ce484222325 ^ seed);
    context.hash(&mut h);
    // splitmix finalizer
    let mut z = h.finish().wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z % n as u64) as usize
}
