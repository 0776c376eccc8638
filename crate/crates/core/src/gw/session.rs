use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{write_h_insertion, GwKey, OracleTable};
use crate::error::{Error, Result};
use crate::moduli::{
    canonical, enumerate_chains, group, is_stable, render_stratum, seeded_choice, ChainSpec, Insertion, LinComb, Rule,
    Stratum,
};
use crate::qk::Strategy;
use crate::rings::{rat, Rational};
use crate::trace::{ReductionTrace, TraceBook, TraceStep, TraceTerm};

#[derive(Clone, Debug, PartialEq)]
pub struct GwExpansion {
    pub rule: Rule,
    pub main: LinComb<GwKey>,
    /// Boundary divisors (one node each) with their weights.
    pub boundary: Vec<(Rational, Stratum)>,
}

impl GwExpansion {
    fn new(rule: Rule) -> Self {
        Self { rule, main: LinComb::new(), boundary: Vec::new() }
    }

    fn push_boundary(&mut self, w: Rational, s: Stratum) {
        if w.is_zero() {
            return;
        }
        if let Some(entry) = self.boundary.iter_mut().find(|(_, t)| *t == s) {
            entry.0 += w;
        } else {
            self.boundary.push((w, s));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Plan {
    Vanishes,
    OnePoint,
    TwoPoint,
    DegreeZero,
    String(usize),
    Divisor(usize),
    Trade(usize, usize),
    TradeThree(usize, usize, usize),
    PsiTransfer(usize, usize),
    PsiSplit(usize, usize, usize),
}

/// Memoized evaluator of Gromov-Witten invariants of one `P^r`.
#[derive(Debug)]
pub struct GwSession {
    r: u32,
    oracle: Option<OracleTable>,
    strategy: Strategy,
    memo: HashMap<GwKey, Rational>,
    strata: HashMap<Stratum, Rational>,
    trace: Option<TraceBook>,
}

impl GwSession {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("target must be P^r with r >= 1".into()));
        }
        Ok(Self {
            r,
            oracle: None,
            strategy: Strategy::Canonical,
            memo: HashMap::new(),
            strata: HashMap::new(),
            trace: None,
        })
    }

    pub fn with_oracle(mut self, oracle: OracleTable) -> Result<Self> {
        if oracle.r() != self.r {
            return Err(Error::DimensionMismatch { left: self.r, right: oracle.r() });
        }
        self.oracle = Some(oracle);
        Ok(self)
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(TraceBook::default());
        self
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn memo(&self) -> impl Iterator<Item = (&GwKey, &Rational)> {
        self.memo.iter()
    }

    pub fn seed(&mut self, key: GwKey, value: Rational) {
        self.memo.insert(key, value);
    }

    pub fn trace(&self, key: &GwKey) -> Option<ReductionTrace> {
        self.trace.as_ref()?.collect(&key.to_string())
    }

    pub fn evaluate_comb(&mut self, comb: &LinComb<GwKey>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (k, w) in comb.iter() {
            total += w * self.evaluate(k)?;
        }
        Ok(total)
    }

    pub fn evaluate(&mut self, key: &GwKey) -> Result<Rational> {
        if let Some(v) = self.memo.get(key) {
            return Ok(v.clone());
        }
        if key.r() != self.r {
            return Err(Error::DimensionMismatch { left: self.r, right: key.r() });
        }
        key.check_stable()?;
        let base = |rule: Rule, v: Rational| Ok::<_, Error>((rule, v));
        let value = match self.plan(key) {
            Plan::Vanishes => Some(base(Rule::Dimension, Rational::zero())?),
            Plan::OnePoint => {
                let ins = key.insertions()[0];
                let oracle = self.oracle.as_ref().ok_or(Error::MissingOracleEntry {
                    d: key.degree(),
                    l: ins.psi,
                    k: ins.class,
                })?;
                Some(base(Rule::BaseOnePoint, oracle.get(key.degree(), ins.psi, ins.class)?.clone())?)
            }
            // a line through two points
            Plan::TwoPoint => Some(base(Rule::BaseTwoPoint, Rational::one())?),
            // psi classes vanish on M_{0,3}(P^r, 0) = P^r
            Plan::DegreeZero => {
                let v = if key.is_primary() { Rational::one() } else { Rational::zero() };
                Some(base(Rule::BaseDegreeZero, v)?)
            }
            _ => None,
        };
        let value = match value {
            Some((rule, v)) => {
                self.record(key, rule, &v, None);
                v
            }
            None => {
                let exp = match self.plan(key) {
                    Plan::String(p) => self.string(key, p)?,
                    Plan::Divisor(p) => self.divisor(key, p)?,
                    Plan::Trade(p, j) => self.trade_h(key, p, j)?,
                    Plan::TradeThree(p, j, k) => self.trade_h_coh(key, p, j, k)?,
                    Plan::PsiTransfer(p, j) => self.psi_transfer(key, p, j)?,
                    Plan::PsiSplit(p, j, k) => self.psi_split(key, p, j, k)?,
                    _ => unreachable!("base cases handled above"),
                };
                self.apply(key, &exp)?
            }
        };
        self.memo.insert(key.clone(), value.clone());
        Ok(value)
    }

    fn apply(&mut self, key: &GwKey, exp: &GwExpansion) -> Result<Rational> {
        let mut total = Rational::zero();
        for (k, w) in exp.main.iter() {
            total += w * self.evaluate(k)?;
        }
        for (w, s) in &exp.boundary {
            total += w * self.boundary_split(s)?;
        }
        self.record(key, exp.rule, &total, Some(exp));
        Ok(total)
    }

    fn record(&mut self, key: &GwKey, rule: Rule, value: &Rational, exp: Option<&GwExpansion>) {
        let Some(book) = self.trace.as_mut() else { return };
        let (main, boundary) = match exp {
            Some(exp) => (
                exp.main.iter().map(|(k, w)| TraceTerm { weight: w.clone(), factors: vec![k.to_string()] }).collect(),
                exp.boundary
                    .iter()
                    .map(|(w, s)| TraceTerm { weight: w.clone(), factors: vec![stratum_text(s)] })
                    .collect(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        book.record(TraceStep { rule, subject: key.to_string(), value: value.clone(), main, boundary });
    }

    fn pick(&self, key: &GwKey, salt: u32, n: usize) -> usize {
        match self.strategy {
            Strategy::Canonical => 0,
            Strategy::Seeded(seed) => seeded_choice(seed, &(key, salt), n),
        }
    }

    fn plan(&self, key: &GwKey) -> Plan {
        if !key.satisfies_dimension() {
            return Plan::Vanishes;
        }
        let ins = key.insertions();
        let n = ins.len();
        let d = key.degree();
        if n == 1 {
            return Plan::OnePoint;
        }
        if d == 0 && n == 3 {
            return Plan::DegreeZero;
        }
        if n == 2 && key.is_primary() {
            // dimension forces d = 1 and two point classes
            return Plan::TwoPoint;
        }
        if let Some(p) = ins.iter().rposition(|i| *i == Insertion::new(0, 0)) {
            if is_stable(n - 1, d) {
                return Plan::String(p);
            }
        }
        if d > 0 {
            if let Some(p) = ins.iter().rposition(|i| *i == Insertion::new(0, 1)) {
                return Plan::Divisor(p);
            }
        }
        let min = ins.iter().map(Insertion::weight).min().expect("n >= 2");
        let mut cands: Vec<usize> = (0..n).filter(|&i| ins[i].weight() == min).collect();
        cands.reverse();
        let p = cands[self.pick(key, 0, cands.len())];
        let others: Vec<usize> = (0..n).filter(|&i| i != p).collect();
        let j = others[self.pick(key, 1, others.len())];
        let rest: Vec<usize> = others.iter().copied().filter(|&i| i != j).collect();
        if ins[p].class > 0 {
            if key.is_primary() && n >= 3 {
                return Plan::TradeThree(p, j, rest[self.pick(key, 2, rest.len())]);
            }
            return Plan::Trade(p, j);
        }
        if n == 2 {
            return Plan::PsiTransfer(p, j);
        }
        Plan::PsiSplit(p, j, rest[self.pick(key, 2, rest.len())])
    }

    fn key(&self, d: u32, ins: Vec<Insertion>) -> GwKey {
        GwKey::from_canonical(self.r, d, ins)
    }

    fn without(ins: &[Insertion], skip: &[usize]) -> Vec<Insertion> {
        ins.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, x)| *x).collect()
    }

    fn check_distinct(key: &GwKey, idx: &[usize]) -> Result<()> {
        let n = key.n();
        let distinct = idx.iter().enumerate().all(|(a, &i)| i < n && idx[..a].iter().all(|&j| j != i));
        if distinct {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("rule needs distinct markings of {key}")))
        }
    }

    /// `<tau_0(1), ...> = sum_i <..., tau_{l_i - 1}(gamma_i), ...>`.
    pub fn string(&self, key: &GwKey, p: usize) -> Result<GwExpansion> {
        let rest = Self::without(key.insertions(), &[p]);
        let mut exp = GwExpansion::new(Rule::String);
        for i in 0..rest.len() {
            if rest[i].psi > 0 {
                let mut ins = rest.clone();
                ins[i].psi -= 1;
                exp.main.add(self.key(key.degree(), ins), Rational::one());
            }
        }
        Ok(exp)
    }

    /// `<tau_0(H), ...> = d <...> + sum_i <..., tau_{l_i - 1}(gamma_i H), ...>`.
    pub fn divisor(&self, key: &GwKey, p: usize) -> Result<GwExpansion> {
        let d = key.degree();
        let rest = Self::without(key.insertions(), &[p]);
        let mut exp = GwExpansion::new(Rule::Divisor);
        exp.main.add(self.key(d, rest.clone()), rat(d as i64));
        for i in 0..rest.len() {
            if rest[i].psi > 0 && rest[i].class < self.r {
                let mut ins = rest.clone();
                ins[i].psi -= 1;
                ins[i].class += 1;
                exp.main.add(self.key(d, ins), Rational::one());
            }
        }
        Ok(exp)
    }

    fn lowered(key: &GwKey, p: usize) -> Result<Insertion> {
        let ins = key.insertions()[p];
        if ins.class == 0 {
            return Err(Error::InvalidArgument(format!("marking {} of {key} carries no H", p + 1)));
        }
        Ok(Insertion::new(ins.psi, ins.class - 1))
    }

    /// `ev_p^* H = ev_j^* H + d psi_j - sum d_1 D_{p,d_1|j,d_2}`.
    pub fn trade_h(&self, key: &GwKey, p: usize, j: usize) -> Result<GwExpansion> {
        Self::check_distinct(key, &[p, j])?;
        let d = key.degree();
        let ins = key.insertions();
        let low = Self::lowered(key, p)?;
        let target = ins[j];
        let others = Self::without(ins, &[p, j]);
        let mut exp = GwExpansion::new(Rule::TradeH);
        if target.class < self.r {
            exp.main.add(self.with(d, &others, &[low, Insertion::new(target.psi, target.class + 1)]), Rational::one());
        }
        if d > 0 {
            exp.main.add(self.with(d, &others, &[low, Insertion::new(target.psi + 1, target.class)]), rat(d as i64));
        }
        self.divisors(&mut exp, d, &[low], &[target], &others, |d1, _| -rat(d1 as i64));
        Ok(exp)
    }

    /// `ev_p^* H = ev_j^* H + sum (d_2 D_{pk,d_1|j,d_2} - d_1 D_{p,d_1|jk,d_2})`, for `n >= 3`.
    pub fn trade_h_coh(&self, key: &GwKey, p: usize, j: usize, k: usize) -> Result<GwExpansion> {
        Self::check_distinct(key, &[p, j, k])?;
        let d = key.degree();
        let ins = key.insertions();
        let low = Self::lowered(key, p)?;
        let (target, third) = (ins[j], ins[k]);
        let others = Self::without(ins, &[p, j, k]);
        let mut exp = GwExpansion::new(Rule::TradeThreePoint);
        if target.class < self.r {
            let moved = Insertion::new(target.psi, target.class + 1);
            exp.main.add(self.with(d, &others, &[low, moved, third]), Rational::one());
        }
        self.divisors(&mut exp, d, &[low, third], &[target], &others, |_, d2| rat(d2 as i64));
        self.divisors(&mut exp, d, &[low], &[target, third], &others, |d1, _| -rat(d1 as i64));
        Ok(exp)
    }

    /// `psi_p = D_{p|j} - psi_j` on a 2-pointed space.
    pub fn psi_transfer(&self, key: &GwKey, p: usize, j: usize) -> Result<GwExpansion> {
        Self::check_distinct(key, &[p, j])?;
        let ins = key.insertions();
        if ins[p].psi == 0 {
            return Err(Error::InvalidArgument(format!("marking {} of {key} has no psi", p + 1)));
        }
        let low = Insertion::new(ins[p].psi - 1, ins[p].class);
        let target = ins[j];
        let mut exp = GwExpansion::new(Rule::PsiPair);
        exp.main
            .add(self.with(key.degree(), &[], &[low, Insertion::new(target.psi + 1, target.class)]), -Rational::one());
        self.divisors(&mut exp, key.degree(), &[low], &[target], &[], |_, _| Rational::one());
        Ok(exp)
    }

    /// `psi_p = D_{p|jk}`.
    pub fn psi_split(&self, key: &GwKey, p: usize, j: usize, k: usize) -> Result<GwExpansion> {
        Self::check_distinct(key, &[p, j, k])?;
        let ins = key.insertions();
        if ins[p].psi == 0 {
            return Err(Error::InvalidArgument(format!("marking {} of {key} has no psi", p + 1)));
        }
        let low = Insertion::new(ins[p].psi - 1, ins[p].class);
        let others = Self::without(ins, &[p, j, k]);
        let mut exp = GwExpansion::new(Rule::PsiLower);
        self.divisors(&mut exp, key.degree(), &[low], &[ins[j], ins[k]], &others, |_, _| Rational::one());
        Ok(exp)
    }

    fn with(&self, d: u32, others: &[Insertion], extra: &[Insertion]) -> GwKey {
        let mut ins = others.to_vec();
        ins.extend_from_slice(extra);
        self.key(d, ins)
    }

    fn divisors(
        &self,
        exp: &mut GwExpansion,
        d: u32,
        left: &[Insertion],
        right: &[Insertion],
        others: &[Insertion],
        weight: impl Fn(u32, u32) -> Rational,
    ) {
        let grouped = group(&canonical(others.to_vec()));
        let spec = ChainSpec { degree: d, left, right, others: &grouped, min_first_degree: 0, max_nodes: 1 };
        for chain in enumerate_chains(&spec) {
            let (d1, d2) = (chain.components[0].degree, chain.components[1].degree);
            let w = weight(d1, d2) * &chain.multiplicity;
            exp.push_boundary(w, Stratum { components: chain.components, node_psi: vec![0] });
        }
    }

    /// Splitting through the diagonal `sum_a H^a (x) H^{r-a}`.
    pub fn boundary_split(&mut self, s: &Stratum) -> Result<Rational> {
        if s.nodes() != 1 {
            return Err(Error::InvalidArgument("cohomological splitting takes boundary divisors".into()));
        }
        if let Some(v) = self.strata.get(s) {
            return Ok(v.clone());
        }
        let mut value = Rational::zero();
        let mut terms = Vec::new();
        for a in 0..=self.r {
            let left = self.key(s.components[0].degree, s.component_insertions(0, None, Some(a)));
            let right = self.key(s.components[1].degree, s.component_insertions(1, Some(self.r - a), None));
            if !left.satisfies_dimension() || !right.satisfies_dimension() {
                continue;
            }
            let lv = self.evaluate(&left)?;
            if lv.is_zero() {
                continue;
            }
            value += lv * self.evaluate(&right)?;
            if self.trace.is_some() {
                terms.push(TraceTerm { weight: Rational::one(), factors: vec![left.to_string(), right.to_string()] });
            }
        }
        if let Some(book) = self.trace.as_mut() {
            book.record(TraceStep {
                rule: Rule::BoundarySplit,
                subject: stratum_text(s),
                value: value.clone(),
                main: Vec::new(),
                boundary: terms,
            });
        }
        self.strata.insert(s.clone(), value.clone());
        Ok(value)
    }
}

fn stratum_text(s: &Stratum) -> String {
    render_stratum(s, |out, ins| {
        let _ = write_h_insertion(out, ins);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gw::NTable;

    fn key(r: u32, d: u32, ins: &[(u32, u32)]) -> GwKey {
        GwKey::new(r, d, ins.iter().map(|&(l, k)| Insertion::new(l, k)).collect()).unwrap()
    }

    #[test]
    fn line_through_two_points() {
        let mut s = GwSession::new(2).unwrap();
        assert_eq!(s.evaluate(&key(2, 1, &[(0, 2), (0, 2)])).unwrap(), rat(1));
    }

    #[test]
    fn reduction_matches_closed_recursion() {
        let table = NTable::up_to(4);
        let mut s = GwSession::new(2).unwrap();
        for (d, n) in table.iter() {
            assert_eq!(&s.evaluate(&GwKey::plane_curves(d)).unwrap(), n, "d={d}");
        }
    }

    #[test]
    fn dimension_guard() {
        let mut s = GwSession::new(2).unwrap();
        assert_eq!(s.evaluate(&key(2, 2, &[(0, 2), (0, 2)])).unwrap(), rat(0));
        // vanishing never consults the oracle
        assert_eq!(s.evaluate(&key(2, 1, &[(3, 1)])).unwrap(), rat(0));
    }

    #[test]
    fn missing_oracle() {
        let mut s = GwSession::new(2).unwrap();
        assert!(matches!(s.evaluate(&key(2, 1, &[(1, 2)])), Err(Error::MissingOracleEntry { d: 1, l: 1, k: 2 })));
    }

    #[test]
    fn string_and_divisor_axioms() {
        let mut s = GwSession::new(2).unwrap();
        let k = key(2, 1, &[(0, 2), (0, 2), (0, 0)]);
        assert_eq!(s.evaluate(&k).unwrap(), rat(0));
        let k = key(2, 2, &[(0, 2), (0, 2), (0, 2), (0, 2), (0, 2), (0, 1)]);
        assert_eq!(s.evaluate(&k).unwrap(), rat(2));
    }

    #[test]
    fn degree_zero_trade_has_no_boundary() {
        let s = GwSession::new(2).unwrap();
        let k = key(2, 0, &[(0, 1), (0, 1), (0, 2), (0, 0)]);
        let exp = s.trade_h_coh(&k, 0, 2, 1).unwrap();
        assert!(exp.boundary.is_empty());
        let exp = s.trade_h(&k, 0, 1).unwrap();
        assert!(exp.boundary.is_empty());
        assert_eq!(exp.main.len(), 1);
    }

    #[test]
    fn traces_replay() {
        let mut s = GwSession::new(2).unwrap().with_trace();
        let k = GwKey::plane_curves(3);
        assert_eq!(s.evaluate(&k).unwrap(), rat(12));
        let t = s.trace(&k).unwrap();
        t.replay().unwrap();
    }
}
