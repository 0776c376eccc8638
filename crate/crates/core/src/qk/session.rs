use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{write_k_insertion, InvariantKey};
use crate::error::{Error, Result};
use crate::jfunction::{j_coefficient_with, JCoefficient, JConvention};
use crate::moduli::{
    enumerate_chains, group, is_stable, node_powers, render_stratum, seeded_choice, ChainSpec, Insertion, LinComb,
    Rule, Stratum,
};
use crate::rings::{k_chi, k_metric, KClass, PairingMatrix, Rational};
use crate::trace::{ReductionTrace, TraceBook, TraceStep, TraceTerm};

/// How the engine picks among admissible rewrites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Fixed choices; the trade target of a 2-point invariant is its first marking.
    #[default]
    Canonical,
    /// Pseudo-random admissible choices, deterministic per seed and key.
    Seeded(u64),
}

/// A rewrite of one invariant: keys with weights plus weighted boundary strata.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub rule: Rule,
    pub main: LinComb<InvariantKey>,
    pub boundary: Vec<(Rational, Stratum)>,
}

impl Expansion {
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
    OnePoint,
    DegreeZero,
    Drop(usize),
    Trade(usize, usize),
    Pair(usize, usize),
    Lower(usize, usize, usize),
}

/// Memoized evaluator of quantum K-invariants of one `P^r`.
#[derive(Debug)]
pub struct QkSession {
    r: u32,
    convention: JConvention,
    strategy: Strategy,
    metric: PairingMatrix,
    memo: HashMap<InvariantKey, Rational>,
    strata: HashMap<Stratum, Rational>,
    j_data: HashMap<u32, JCoefficient>,
    trace: Option<TraceBook>,
}

impl QkSession {
    pub fn new(r: u32) -> Result<Self> {
        Ok(Self {
            r,
            convention: JConvention::Standard,
            strategy: Strategy::Canonical,
            metric: k_metric(r)?,
            memo: HashMap::new(),
            strata: HashMap::new(),
            j_data: HashMap::new(),
            trace: None,
        })
    }

    pub fn with_convention(mut self, convention: JConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Records a [`ReductionTrace`] for every evaluated quantity.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(TraceBook::default());
        self
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn metric(&self) -> &PairingMatrix {
        &self.metric
    }

    /// Memoized values, e.g. for persisting to a cache.
    pub fn memo(&self) -> impl Iterator<Item = (&InvariantKey, &Rational)> {
        self.memo.iter()
    }

    /// Preloads a known value; later evaluations of `key` return it unchanged.
    pub fn seed(&mut self, key: InvariantKey, value: Rational) {
        self.memo.insert(key, value);
    }

    pub fn trace(&self, key: &InvariantKey) -> Option<ReductionTrace> {
        self.trace.as_ref()?.collect(&key.to_string())
    }

    pub fn evaluate_comb(&mut self, comb: &LinComb<InvariantKey>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (k, w) in comb.iter() {
            total += w * self.evaluate(k)?;
        }
        Ok(total)
    }

    /// Evaluates `(tau_{k_1}(gamma_1), ...)_{0,n,d}` for arbitrary classes.
    pub fn evaluate_classes(&mut self, d: u32, raw: &[(u32, KClass)]) -> Result<Rational> {
        let comb = super::normalize(d, raw)?;
        for (k, _) in comb.iter() {
            k.check_stable()?;
        }
        self.evaluate_comb(&comb)
    }

    pub fn evaluate(&mut self, key: &InvariantKey) -> Result<Rational> {
        if let Some(v) = self.memo.get(key) {
            return Ok(v.clone());
        }
        if key.r() != self.r {
            return Err(Error::DimensionMismatch { left: self.r, right: key.r() });
        }
        key.check_stable()?;
        let value = match self.plan(key) {
            Plan::OnePoint => {
                let v = self.one_point(key)?;
                self.record_base(key, Rule::BaseOnePoint, &v);
                v
            }
            Plan::DegreeZero => {
                let v = self.degree_zero(key);
                self.record_base(key, Rule::BaseDegreeZero, &v);
                v
            }
            plan => {
                let exp = match plan {
                    Plan::Drop(p) => self.reduce_drop_point(key, p)?,
                    Plan::Trade(p, j) => self.trade_h(key, p, j)?,
                    Plan::Pair(i, j) => self.reduce_psi_pair(key, i, j)?,
                    Plan::Lower(i, j, k) => self.reduce_psi_lower(key, i, j, k)?,
                    Plan::OnePoint | Plan::DegreeZero => unreachable!(),
                };
                self.apply(key, &exp)?
            }
        };
        self.memo.insert(key.clone(), value.clone());
        Ok(value)
    }

    fn apply(&mut self, key: &InvariantKey, exp: &Expansion) -> Result<Rational> {
        let mut total = Rational::zero();
        for (k, w) in exp.main.iter() {
            total += w * self.evaluate(k)?;
        }
        for (w, s) in &exp.boundary {
            total += w * self.boundary_split(s)?;
        }
        if let Some(book) = self.trace.as_mut() {
            let main =
                exp.main.iter().map(|(k, w)| TraceTerm { weight: w.clone(), factors: vec![k.to_string()] }).collect();
            let boundary = exp
                .boundary
                .iter()
                .map(|(w, s)| TraceTerm { weight: w.clone(), factors: vec![stratum_text(s)] })
                .collect();
            book.record(TraceStep { rule: exp.rule, subject: key.to_string(), value: total.clone(), main, boundary });
        }
        Ok(total)
    }

    fn record_base(&mut self, key: &InvariantKey, rule: Rule, value: &Rational) {
        if let Some(book) = self.trace.as_mut() {
            book.record(TraceStep {
                rule,
                subject: key.to_string(),
                value: value.clone(),
                main: Vec::new(),
                boundary: Vec::new(),
            });
        }
    }

    fn pick(&self, key: &InvariantKey, salt: u32, n: usize) -> usize {
        match self.strategy {
            Strategy::Canonical => 0,
            Strategy::Seeded(seed) => seeded_choice(seed, &(key, salt), n),
        }
    }

    fn plan(&self, key: &InvariantKey) -> Plan {
        let ins = key.insertions();
        let n = ins.len();
        let d = key.degree();
        if n == 1 {
            return Plan::OnePoint;
        }
        if d == 0 && n == 3 {
            return Plan::DegreeZero;
        }
        if let Some(p) = ins.iter().rposition(|i| *i == Insertion::new(0, 0)) {
            if is_stable(n - 1, d) {
                return Plan::Drop(p);
            }
        }
        let others = |p: usize| (0..n).filter(move |&i| i != p);
        if n == 2 {
            let mut cands: Vec<usize> = (0..n).filter(|&i| ins[i].psi == 0).collect();
            if cands.is_empty() {
                return Plan::Pair(0, 1);
            }
            // canonical: trade onto the first marking
            cands.reverse();
            let p = cands[self.pick(key, 0, cands.len())];
            return Plan::Trade(p, 1 - p);
        }
        let min = ins.iter().map(Insertion::weight).min().expect("n >= 3");
        let mut cands: Vec<usize> = (0..n).filter(|&i| ins[i].weight() == min).collect();
        cands.reverse();
        let p = cands[self.pick(key, 0, cands.len())];
        if ins[p].class > 0 {
            let targets: Vec<usize> = others(p).collect();
            return Plan::Trade(p, targets[self.pick(key, 1, targets.len())]);
        }
        let mut options: Vec<Plan> = others(p).filter(|&j| ins[j].psi > 0).map(|j| Plan::Pair(p, j)).collect();
        let rest: Vec<usize> = others(p).collect();
        for (a, &j) in rest.iter().enumerate() {
            for &k in &rest[a + 1..] {
                options.push(Plan::Lower(p, j, k));
            }
        }
        options[self.pick(key, 2, options.len())]
    }

    fn one_point(&mut self, key: &InvariantKey) -> Result<Rational> {
        let ins = key.insertions()[0];
        let (r, d, k) = (self.r, key.degree(), ins.psi as usize);
        let fresh = match self.j_data.get(&d) {
            Some(j) => j.series.order() < k,
            None => true,
        };
        if fresh {
            let order = self.j_data.get(&d).map_or(k.max(4), |j| k.max(2 * j.series.order()));
            self.j_data.insert(d, j_coefficient_with(r, d, order, self.convention));
        }
        let coeff = self.j_data[&d].series.coeff(k).expect("order covers k");
        Ok(k_chi(&(&KClass::basis(r, ins.class) * coeff)))
    }

    /// `M_{0,3}(P^r, 0) = P^r` with trivial cotangent lines.
    fn degree_zero(&self, key: &InvariantKey) -> Rational {
        let total: u32 = key.insertions().iter().map(|i| i.class).sum();
        k_chi(&KClass::basis(self.r, total))
    }

    fn key(&self, d: u32, ins: Vec<Insertion>) -> InvariantKey {
        InvariantKey::from_canonical(self.r, d, ins)
    }

    fn without(ins: &[Insertion], skip: &[usize]) -> Vec<Insertion> {
        ins.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, x)| *x).collect()
    }

    /// `e_b * H = e_b + e_{b+1}`.
    fn times_h(&self, b: u32) -> Vec<u32> {
        if b < self.r {
            vec![b, b + 1]
        } else {
            vec![b]
        }
    }

    /// Forgets marking `p`, which must carry `tau_0(e_0)`.
    pub fn reduce_drop_point(&self, key: &InvariantKey, p: usize) -> Result<Expansion> {
        let ins = key.insertions();
        if ins.get(p) != Some(&Insertion::new(0, 0)) {
            return Err(Error::InvalidArgument(format!("marking {} of {key} is not tau_0(e0)", p + 1)));
        }
        if !is_stable(ins.len() - 1, key.degree()) {
            return Err(Error::UnstableKey(format!("forgetting a marking of {key}")));
        }
        let rest = Self::without(ins, &[p]);
        let rule = if rest.iter().all(|i| i.psi == 0) { Rule::FundClass } else { Rule::String };
        let mut exp = Expansion::new(rule);
        exp.main.add(self.key(key.degree(), rest.clone()), Rational::one());
        for i in 0..rest.len() {
            for k in 1..=rest[i].psi {
                let mut lowered = rest.clone();
                lowered[i].psi -= k;
                exp.main.add(self.key(key.degree(), lowered), Rational::one());
            }
        }
        Ok(exp)
    }

    /// Moves one factor of `H` from marking `i` to marking `j`.
    pub fn trade_h(&self, key: &InvariantKey, i: usize, j: usize) -> Result<Expansion> {
        let ins = key.insertions();
        let d = key.degree();
        if i == j || i >= ins.len() || j >= ins.len() {
            return Err(Error::InvalidArgument(format!("trade needs two distinct markings of {key}")));
        }
        if ins[i].class == 0 {
            return Err(Error::InvalidArgument(format!("marking {} of {key} carries no H", i + 1)));
        }
        let lowered = Insertion::new(ins[i].psi, ins[i].class - 1);
        let target = ins[j];
        let others = Self::without(ins, &[i, j]);
        let mut exp = Expansion::new(Rule::TradeH);
        // e_a = H e_{a-1} - e_{a-1}
        let mut minus = others.clone();
        minus.extend([lowered, target]);
        exp.main.add(self.key(d, minus), -Rational::one());
        let moved: Vec<Insertion> =
            self.times_h(target.class).into_iter().map(|b| Insertion::new(target.psi + d, b)).collect();
        for &t in &moved {
            let mut ins = others.clone();
            ins.extend([lowered, t]);
            exp.main.add(self.key(d, ins), Rational::one());
        }
        let grouped = group(&crate::moduli::canonical(others));
        for &t in &moved {
            let left = [lowered];
            let right = [t];
            let spec = ChainSpec {
                degree: d,
                left: &left,
                right: &right,
                others: &grouped,
                min_first_degree: 1,
                max_nodes: usize::MAX,
            };
            for chain in enumerate_chains(&spec) {
                let sign = if chain.nodes() % 2 == 0 { Rational::one() } else { -Rational::one() };
                let w = sign * &chain.multiplicity;
                for powers in node_powers(&chain.left_degrees()) {
                    exp.push_boundary(w.clone(), Stratum { components: chain.components.clone(), node_psi: powers });
                }
            }
        }
        Ok(exp)
    }

    /// Lowers the cotangent powers at `i` and `j` together.
    pub fn reduce_psi_pair(&self, key: &InvariantKey, i: usize, j: usize) -> Result<Expansion> {
        let ins = key.insertions();
        if i == j || i >= ins.len() || j >= ins.len() || ins[i].psi == 0 || ins[j].psi == 0 {
            return Err(Error::InvalidArgument(format!("psi pair needs two markings with L-powers in {key}")));
        }
        let mut main = ins.to_vec();
        main[i].psi -= 1;
        main[j].psi -= 1;
        self.lowering(key, Rule::PsiPair, main, &[i], &[j])
    }

    /// Lowers the cotangent power at `i` using two other markings `j`, `k`.
    pub fn reduce_psi_lower(&self, key: &InvariantKey, i: usize, j: usize, k: usize) -> Result<Expansion> {
        let ins = key.insertions();
        let n = ins.len();
        if i >= n || j >= n || k >= n || i == j || i == k || j == k || ins[i].psi == 0 {
            return Err(Error::InvalidArgument(format!(
                "psi lowering needs an L-power and two other markings in {key}"
            )));
        }
        let mut main = ins.to_vec();
        main[i].psi -= 1;
        self.lowering(key, Rule::PsiLower, main, &[i], &[j, k])
    }

    /// `F = F' + F|_D`, where `F'` has one cotangent factor removed and `D` is the union of
    /// divisors separating `left` from `right`.
    fn lowering(
        &self,
        key: &InvariantKey,
        rule: Rule,
        main: Vec<Insertion>,
        left: &[usize],
        right: &[usize],
    ) -> Result<Expansion> {
        let ins = key.insertions();
        let mut exp = Expansion::new(rule);
        exp.main.add(self.key(key.degree(), main), Rational::one());
        let l: Vec<Insertion> = left.iter().map(|&x| ins[x]).collect();
        let r: Vec<Insertion> = right.iter().map(|&x| ins[x]).collect();
        let skip: Vec<usize> = left.iter().chain(right).copied().collect();
        let grouped = group(&Self::without(ins, &skip));
        let spec = ChainSpec {
            degree: key.degree(),
            left: &l,
            right: &r,
            others: &grouped,
            min_first_degree: 0,
            max_nodes: usize::MAX,
        };
        for chain in enumerate_chains(&spec) {
            let sign = if chain.nodes() % 2 == 1 { Rational::one() } else { -Rational::one() };
            let m = chain.nodes();
            exp.push_boundary(
                sign * chain.multiplicity,
                Stratum { components: chain.components, node_psi: vec![0; m] },
            );
        }
        Ok(exp)
    }

    /// chi of an integrand restricted to a chain stratum, contracted through `g^{ab}` at each node.
    pub fn boundary_split(&mut self, s: &Stratum) -> Result<Rational> {
        if let Some(v) = self.strata.get(s) {
            return Ok(v.clone());
        }
        let dim = (self.r + 1) as usize;
        let m = s.nodes();
        let ginv: Vec<Vec<Rational>> = self.metric.inverse().to_vec();
        let mut acc = Vec::with_capacity(dim);
        for a in 0..dim as u32 {
            acc.push(self.component(s, 0, None, Some(a))?);
        }
        let mut value = Rational::zero();
        for l in 1..=m {
            let u: Vec<Rational> = (0..dim).map(|b| (0..dim).map(|a| &acc[a] * &ginv[a][b]).sum()).collect();
            if l == m {
                for (b, ub) in u.iter().enumerate() {
                    if !ub.is_zero() {
                        value += ub * self.component(s, l, Some(b as u32), None)?;
                    }
                }
            } else {
                let mut next = vec![Rational::zero(); dim];
                for (b, ub) in u.iter().enumerate() {
                    if ub.is_zero() {
                        continue;
                    }
                    for (a, slot) in next.iter_mut().enumerate() {
                        *slot += ub * self.component(s, l, Some(b as u32), Some(a as u32))?;
                    }
                }
                acc = next;
            }
        }
        if self.trace.is_some() {
            self.record_split(s, &value)?;
        }
        self.strata.insert(s.clone(), value.clone());
        Ok(value)
    }

    fn component(&mut self, s: &Stratum, l: usize, left: Option<u32>, right: Option<u32>) -> Result<Rational> {
        let key = self.key(s.components[l].degree, s.component_insertions(l, left, right));
        self.evaluate(&key)
    }

    fn record_split(&mut self, s: &Stratum, value: &Rational) -> Result<()> {
        let subject = stratum_text(s);
        if self.trace.as_ref().is_some_and(|b| b.contains(&subject)) {
            return Ok(());
        }
        let dim = self.r + 1;
        let m = s.nodes();
        let mut terms = Vec::new();
        // one (a_l, b_l) index pair per node
        let mut idx = vec![0u32; 2 * m];
        loop {
            let mut w = Rational::one();
            for l in 0..m {
                w *= self.metric.inv(idx[2 * l] as usize, idx[2 * l + 1] as usize);
            }
            if !w.is_zero() {
                let mut factors = Vec::with_capacity(m + 1);
                for c in 0..=m {
                    let left = (c > 0).then(|| idx[2 * (c - 1) + 1]);
                    let right = (c < m).then(|| idx[2 * c]);
                    let key = self.key(s.components[c].degree, s.component_insertions(c, left, right));
                    self.evaluate(&key)?;
                    factors.push(key.to_string());
                }
                terms.push(TraceTerm { weight: w, factors });
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    let book = self.trace.as_mut().expect("tracing");
                    book.record(TraceStep {
                        rule: Rule::BoundarySplit,
                        subject,
                        value: value.clone(),
                        main: Vec::new(),
                        boundary: terms,
                    });
                    return Ok(());
                }
                idx[pos] += 1;
                if idx[pos] < dim {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// `[(e0, L^1*N) @ d=1 -- (L^2*e1, L^1*N) @ d=1]`; `N` marks a node branch.
pub(crate) fn stratum_text(s: &Stratum) -> String {
    render_stratum(s, |out, ins| {
        let _ = write_k_insertion(out, ins);
    })
}
