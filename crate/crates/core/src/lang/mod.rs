//! The textual language for classes and invariants.
//!
//! ```text
//! invariant := "(" insertion ("," insertion)* ")" "@" "d=" INT
//! insertion := ["L^" INT "*"] class
//! class     := ["-"] term (("+" | "-") term)*
//! term      := [coef "*"] atom
//! atom      := "e" INT | "H" | "H^" INT | "1"
//! coef      := INT | INT "/" INT
//! ```
//!
//! Whitespace between tokens is ignored. `L` is the cotangent line at the insertion's own
//! marking. Errors carry the byte offset at which parsing failed.

mod parser;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gw::GwKey;
use crate::moduli::{Insertion, LinComb};
use crate::qk::InvariantKey;
use crate::rings::{CohClass, KClass, Rational};
use parser::Parser;

/// Byte range in the source text. Spans never take part in equality, so a reparsed tree
/// compares equal to the original however it was spaced.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    E(u32),
    H,
    HPow(u32),
    One,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coef {
    pub num: BigInt,
    pub den: Option<BigInt>,
}

impl Coef {
    pub fn value(&self) -> Rational {
        match &self.den {
            Some(den) => Rational::new(self.num.clone(), den.clone()),
            None => Rational::from_integer(self.num.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub sign: Sign,
    pub coef: Option<Coef>,
    pub atom: Atom,
    pub span: Span,
    pub atom_span: Span,
}

impl Term {
    fn weight(&self) -> Rational {
        let c = self.coef.as_ref().map_or_else(Rational::one, Coef::value);
        match self.sign {
            Sign::Plus => c,
            Sign::Minus => -c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassExpr {
    pub terms: Vec<Term>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionExpr {
    pub psi: Option<u32>,
    pub class: ClassExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantExpr {
    pub insertions: Vec<InsertionExpr>,
    pub degree: u32,
    pub span: Span,
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.den {
            Some(den) => write!(f, "{}/{}", self.num, den),
            None => write!(f, "{}", self.num),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::E(a) => write!(f, "e{a}"),
            Atom::H => f.write_str("H"),
            Atom::HPow(k) => write!(f, "H^{k}"),
            Atom::One => f.write_str("1"),
        }
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            match (i, t.sign) {
                (0, Sign::Plus) => {}
                (0, Sign::Minus) => f.write_str("-")?,
                (_, Sign::Plus) => f.write_str(" + ")?,
                (_, Sign::Minus) => f.write_str(" - ")?,
            }
            if let Some(c) = &t.coef {
                write!(f, "{c}*")?;
            }
            write!(f, "{}", t.atom)?;
        }
        Ok(())
    }
}

impl fmt::Display for InsertionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(k) = self.psi {
            write!(f, "L^{k}*")?;
        }
        write!(f, "{}", self.class)
    }
}

impl fmt::Display for InvariantExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, ins) in self.insertions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{ins}")?;
        }
        write!(f, ") @ d={}", self.degree)
    }
}

pub fn parse_class_expr(text: &str) -> Result<ClassExpr> {
    let mut p = Parser::new(text);
    let c = p.class()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_invariant_expr(text: &str) -> Result<InvariantExpr> {
    let mut p = Parser::new(text);
    let inv = p.invariant()?;
    p.finish()?;
    Ok(inv)
}

impl ClassExpr {
    /// The class in `K(P^r)`.
    pub fn to_k(&self, r: u32) -> Result<KClass> {
        let mut out = KClass::zero(r);
        for t in &self.terms {
            let atom = match t.atom {
                Atom::E(a) if a > r => {
                    return Err(Error::Parse { pos: t.atom_span.start, msg: format!("e{a} does not exist on P^{r}") })
                }
                Atom::E(a) => KClass::basis(r, a),
                Atom::H => KClass::hyperplane(r),
                Atom::HPow(k) => KClass::h_power(r, k as i64),
                Atom::One => KClass::one(r),
            };
            out = &out + &atom.scale(&t.weight());
        }
        Ok(out)
    }

    /// The class in `H^*(P^r)`; powers of `H` past `r` vanish.
    pub fn to_coh(&self, r: u32) -> Result<CohClass> {
        let mut out = CohClass::zero(r);
        for t in &self.terms {
            let atom = match t.atom {
                Atom::E(_) => {
                    return Err(Error::Parse {
                        pos: t.atom_span.start,
                        msg: "basis classes eN belong to K-theory; use 1, H, H^k".into(),
                    })
                }
                Atom::H => CohClass::hyperplane(r),
                Atom::HPow(k) => CohClass::basis(r, k),
                Atom::One => CohClass::one(r),
            };
            out = &out + &atom.scale(&t.weight());
        }
        Ok(out)
    }
}

pub fn parse_k_class(text: &str, r: u32) -> Result<KClass> {
    parse_class_expr(text)?.to_k(r)
}

pub fn parse_coh_class(text: &str, r: u32) -> Result<CohClass> {
    parse_class_expr(text)?.to_coh(r)
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("target must be P^r with r >= 1".into()));
    }
    Ok(())
}

fn stable_or_err(expr: &InvariantExpr) -> Result<()> {
    if crate::moduli::is_stable(expr.insertions.len(), expr.degree) {
        Ok(())
    } else {
        Err(Error::UnstableKey(format!("{expr} (n={}, d={})", expr.insertions.len(), expr.degree)))
    }
}

/// Multilinear expansion of per-insertion coefficient vectors into basis keys.
fn expand<K: Ord + Clone>(
    expr: &InvariantExpr,
    classes: Vec<Vec<Rational>>,
    make: impl Fn(Vec<Insertion>) -> Result<K>,
) -> Result<LinComb<K>> {
    let mut partial: Vec<(Vec<Insertion>, Rational)> = vec![(Vec::new(), Rational::one())];
    for (ins, coeffs) in expr.insertions.iter().zip(classes) {
        let psi = ins.psi.unwrap_or(0);
        let mut next = Vec::new();
        for (prefix, w) in &partial {
            for (a, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    let mut v = prefix.clone();
                    v.push(Insertion::new(psi, a as u32));
                    next.push((v, w * c));
                }
            }
        }
        partial = next;
    }
    let mut out = LinComb::new();
    for (ins, w) in partial {
        out.add(make(ins)?, w);
    }
    Ok(out)
}

/// Parses a quantum K-invariant of `P^r` into weighted canonical keys.
pub fn parse_qk_invariant(text: &str, r: u32) -> Result<LinComb<InvariantKey>> {
    check_r(r)?;
    let expr = parse_invariant_expr(text)?;
    stable_or_err(&expr)?;
    let classes =
        expr.insertions.iter().map(|i| i.class.to_k(r).map(|c| c.coeffs().to_vec())).collect::<Result<Vec<_>>>()?;
    expand(&expr, classes, |ins| InvariantKey::new(r, expr.degree, ins))
}

/// Parses a Gromov-Witten invariant of `P^r` into weighted canonical keys.
pub fn parse_gw_invariant(text: &str, r: u32) -> Result<LinComb<GwKey>> {
    check_r(r)?;
    let expr = parse_invariant_expr(text)?;
    stable_or_err(&expr)?;
    let classes =
        expr.insertions.iter().map(|i| i.class.to_coh(r).map(|c| c.coeffs().to_vec())).collect::<Result<Vec<_>>>()?;
    expand(&expr, classes, |ins| GwKey::new(r, expr.degree, ins))
}

/// Canonical text of a key; parsing it back yields the key with weight 1.
pub fn format_key(key: &impl fmt::Display) -> String {
    key.to_string()
}

/// Parses canonical key text back into exactly one key.
pub fn parse_qk_key(text: &str, r: u32) -> Result<InvariantKey> {
    single(parse_qk_invariant(text, r)?, text)
}

pub fn parse_gw_key(text: &str, r: u32) -> Result<GwKey> {
    single(parse_gw_invariant(text, r)?, text)
}

fn single<K: Ord + Clone>(comb: LinComb<K>, text: &str) -> Result<K> {
    let mut it = comb.iter();
    match (it.next(), it.next()) {
        (Some((k, w)), None) if w.is_one() => Ok(k.clone()),
        _ => Err(Error::InvalidArgument(format!("{text:?} is not a single basis invariant"))),
    }
}
