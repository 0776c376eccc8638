use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rings::Rational;

/// 1-point descendants `<tau_l(H^k)>_{0,1,d}` of `P^r`, supplied from outside.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleTable {
    r: u32,
    entries: HashMap<(u32, u32, u32), Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    r: Option<i64>,
    entries: Vec<RawEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    d: i64,
    l: i64,
    k: i64,
    value: String,
}

impl OracleTable {
    pub fn new(r: u32) -> Self {
        Self { r, entries: HashMap::new() }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds an entry; a second entry for the same `(d, l, k)` is an error.
    pub fn insert(&mut self, d: u32, l: u32, k: u32, value: Rational) -> Result<()> {
        if k > self.r {
            return Err(Error::Oracle(format!("H^{k} vanishes on P^{}", self.r)));
        }
        if self.entries.insert((d, l, k), value).is_some() {
            return Err(Error::Oracle(format!("duplicate entry d={d}, l={l}, k={k}")));
        }
        Ok(())
    }

    pub fn get(&self, d: u32, l: u32, k: u32) -> Result<&Rational> {
        self.entries.get(&(d, l, k)).ok_or(Error::MissingOracleEntry { d, l, k })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Oracle(e.to_string()))?;
        let r = raw.r.ok_or_else(|| Error::Oracle("missing field `r`".into()))?;
        let r = u32::try_from(r)
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| Error::Oracle(format!("r must be positive, got {r}")))?;
        let mut table = Self::new(r);
        for e in raw.entries {
            let field = |name: &str, v: i64| {
                u32::try_from(v).map_err(|_| Error::Oracle(format!("{name} must be a nonnegative integer, got {v}")))
            };
            let value: Rational =
                e.value.trim().parse().map_err(|_| Error::Oracle(format!("not an exact rational: {:?}", e.value)))?;
            table.insert(field("d", e.d)?, field("l", e.l)?, field("k", e.k)?, value)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let mut entries: Vec<_> = self.entries.iter().collect();
        entries.sort_by_key(|(k, _)| **k);
        let raw = RawTable {
            r: Some(self.r as i64),
            entries: entries
                .into_iter()
                .map(|(&(d, l, k), v)| RawEntry { d: d as i64, l: l as i64, k: k as i64, value: v.to_string() })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}

pub fn load_oracle(path: impl AsRef<Path>) -> Result<OracleTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Oracle(format!("{}: {e}", path.display())))?;
    OracleTable::from_json(&text)
}
