//! Audit records of a reduction: which rule rewrote which quantity into what.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::moduli::Rule;
use crate::rings::Rational;

fn ser_rational<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `weight * prod(value(factor))`; an empty factor list stands for the constant 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceTerm {
    #[serde(serialize_with = "ser_rational")]
    pub weight: Rational,
    pub factors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub rule: Rule,
    /// Canonical text of the invariant or boundary stratum that was rewritten.
    pub subject: String,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub main: Vec<TraceTerm>,
    pub boundary: Vec<TraceTerm>,
}

impl TraceStep {
    pub fn is_base(&self) -> bool {
        self.main.is_empty() && self.boundary.is_empty()
    }
}

/// Steps in dependency order: every factor is the subject of an earlier step.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn step(&self, subject: &str) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.subject == subject)
    }

    /// Every value occurring in the trace: step values and the value of each term.
    pub fn quantities(&self) -> Vec<Rational> {
        let values: HashMap<&str, &Rational> = self.steps.iter().map(|s| (s.subject.as_str(), &s.value)).collect();
        let mut out = Vec::new();
        for s in &self.steps {
            out.push(s.value.clone());
            let main = sum_terms(&s.main, &values);
            let boundary = sum_terms(&s.boundary, &values);
            if let (Some(m), Some(b)) = (main, boundary) {
                out.push(m);
                out.push(b);
            }
        }
        out
    }

    /// Re-derives every non-base value from the recorded terms.
    pub fn replay(&self) -> std::result::Result<(), String> {
        let mut known: HashMap<&str, &Rational> = HashMap::new();
        for s in &self.steps {
            if !s.is_base() {
                let total = sum_terms(&s.main, &known)
                    .zip(sum_terms(&s.boundary, &known))
                    .map(|(m, b)| m + b)
                    .ok_or_else(|| format!("{}: uses a value not derived earlier", s.subject))?;
                if total != s.value {
                    return Err(format!("{}: recorded {} but terms give {}", s.subject, s.value, total));
                }
            }
            known.insert(s.subject.as_str(), &s.value);
        }
        Ok(())
    }
}

fn sum_terms(terms: &[TraceTerm], values: &HashMap<&str, &Rational>) -> Option<Rational> {
    let mut total = Rational::zero();
    for t in terms {
        let mut prod = t.weight.clone();
        for f in &t.factors {
            prod *= *values.get(f.as_str())?;
        }
        total += prod;
    }
    Some(total)
}

/// Steps recorded by a session, addressable by subject.
#[derive(Clone, Debug, Default)]
pub(crate) struct TraceBook {
    steps: HashMap<String, TraceStep>,
}

impl TraceBook {
    pub(crate) fn record(&mut self, step: TraceStep) {
        self.steps.entry(step.subject.clone()).or_insert(step);
    }

    pub(crate) fn contains(&self, subject: &str) -> bool {
        self.steps.contains_key(subject)
    }

    /// The steps reachable from `root`, children before parents.
    pub(crate) fn collect(&self, root: &str) -> Option<ReductionTrace> {
        self.steps.get(root)?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        // iterative post-order; traces can be deep
        let mut stack: Vec<(&str, bool)> = vec![(root, false)];
        while let Some((subject, expanded)) = stack.pop() {
            if expanded {
                out.push(self.steps[subject].clone());
                continue;
            }
            if !seen.insert(subject) {
                continue;
            }
            let step = self.steps.get(subject)?;
            stack.push((subject, true));
            for t in step.main.iter().chain(&step.boundary).rev() {
                for f in t.factors.iter().rev() {
                    if !seen.contains(f.as_str()) {
                        stack.push((f.as_str(), false));
                    }
                }
            }
        }
        Some(ReductionTrace { steps: out })
    }
}
