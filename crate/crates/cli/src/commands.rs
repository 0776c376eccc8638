use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_traits::Zero;
use qgw_core::gw::{load_oracle, GwKey, GwSession, NTable};
use qgw_core::jfunction::{one_point_series_with, JConvention};
use qgw_core::lang::{self, format_key};
use qgw_core::moduli::LinComb;
use qgw_core::qk::QkSession;
use qgw_core::rings::Rational;
use qgw_core::trace::ReductionTrace;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::output::{write_csv, write_trace, Format};
use crate::{CacheOpts, CliError, Engine, GwArgs, JkArgs, QkArgs};

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn convention_name(c: JConvention) -> &'static str {
    match c {
        JConvention::Standard => "standard",
        JConvention::Geometric => "geometric",
    }
}

fn qk_theory(r: u32, c: JConvention) -> String {
    format!("qk:r={r}:{}", convention_name(c))
}

fn gw_theory(r: u32) -> String {
    format!("gw:r={r}")
}

fn print_json(out: &mut impl Write, v: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json value serializes")).map_err(io)
}

/// Checks freshly computed values against the cache and merges them in.
fn sync_cache(opts: &CacheOpts, theory: &str, entries: BTreeMap<String, String>) -> Result<(), CliError> {
    if let Some(cache) = opts.cache() {
        cache.store(theory, &entries)?;
    }
    Ok(())
}

pub fn jk(out: &mut impl Write, a: &JkArgs) -> Result<(), CliError> {
    let expr = lang::parse_class_expr(&a.class)?;
    let class = expr.to_k(a.r)?;
    if a.r == 0 {
        return Err(CliError::Usage("--r must be at least 1".into()));
    }
    let convention = JConvention::from(a.convention);
    let series = one_point_series_with(a.r, a.d, &class, a.order as usize, convention)?;
    let rows: Vec<(u32, String, Rational)> = series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let psi = if k > 0 { format!("L^{k}*") } else { String::new() };
            (k as u32, format!("({psi}{expr}) @ d={}", a.d), v.clone())
        })
        .collect();
    match a.format {
        Format::Text => {
            writeln!(out, "d\tk\tvalue").map_err(io)?;
            for (k, _, v) in &rows {
                writeln!(out, "{}\t{k}\t{v}", a.d).map_err(io)?;
            }
        }
        Format::Json => print_json(
            out,
            &json!({
                "r": a.r,
                "class": expr.to_string(),
                "convention": convention_name(convention),
                "rows": rows.iter().map(|(k, key, v)| json!({"d": a.d, "k": k, "key": key, "value": v.to_string()})).collect::<Vec<_>>(),
            }),
        )?,
        Format::Csv => write_csv(out, rows.iter().map(|(_, key, v)| (key.as_str(), v)))?,
    }
    Ok(())
}

/// Per-key results of evaluating a linear combination.
struct Evaluated {
    text: String,
    value: Rational,
    terms: Vec<(String, Rational, Rational)>,
    traces: Vec<ReductionTrace>,
}

impl Evaluated {
    fn entries(&self) -> BTreeMap<String, String> {
        self.terms.iter().map(|(k, _, v)| (k.clone(), v.to_string())).collect()
    }

    fn print(&self, out: &mut impl Write, format: Format, theory: &str, extra: Value) -> Result<(), CliError> {
        match format {
            Format::Text => {
                writeln!(out, "{}", self.value).map_err(io)?;
                for t in &self.traces {
                    writeln!(out).map_err(io)?;
                    write_trace(out, t).map_err(io)?;
                }
            }
            Format::Json => {
                let mut v = json!({
                    "theory": theory,
                    "expression": self.text,
                    "value": self.value.to_string(),
                    "terms": self.terms.iter().map(|(k, w, v)| json!({"key": k, "weight": w.to_string(), "value": v.to_string()})).collect::<Vec<_>>(),
                });
                if !self.traces.is_empty() {
                    v["trace"] = serde_json::to_value(&self.traces).expect("traces serialize");
                }
                if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
                    m.extend(e);
                }
                print_json(out, &v)?;
            }
            Format::Csv => write_csv(out, [(self.text.as_str(), &self.value)])?,
        }
        Ok(())
    }
}

fn evaluate_all<K: Ord + Clone + std::fmt::Display>(
    text: String,
    comb: &LinComb<K>,
    mut eval: impl FnMut(&K) -> Result<(Rational, Option<ReductionTrace>), CliError>,
) -> Result<Evaluated, CliError> {
    let mut value = Rational::zero();
    let mut terms = Vec::new();
    let mut traces = Vec::new();
    for (key, w) in comb.iter() {
        let (v, trace) = eval(key)?;
        value += w * &v;
        terms.push((format_key(key), w.clone(), v));
        traces.extend(trace);
    }
    Ok(Evaluated { text, value, terms, traces })
}

pub fn qk(out: &mut impl Write, a: &QkArgs) -> Result<(), CliError> {
    let convention = JConvention::from(a.convention);
    let text = lang::parse_invariant_expr(&a.expr)?.to_string();
    let comb = lang::parse_qk_invariant(&a.expr, a.r)?;
    let mut session = QkSession::new(a.r)?.with_convention(convention);
    if a.trace {
        session = session.with_trace();
    }
    let result = evaluate_all(text, &comb, |k| Ok((session.evaluate(k)?, session.trace(k))))?;
    let theory = qk_theory(a.r, convention);
    sync_cache(&a.cache, &theory, result.entries())?;
    result.print(out, a.format, &theory, json!({}))
}

fn session_for(r: u32, oracle: Option<&Path>, trace: bool) -> Result<GwSession, CliError> {
    let mut s = GwSession::new(r)?;
    if let Some(path) = oracle {
        s = s.with_oracle(load_oracle(path)?)?;
    }
    if trace {
        s = s.with_trace();
    }
    Ok(s)
}

/// The degree `d` if `key` is `N_d`'s configuration: `3d - 1` point classes on `P^2`.
fn plane_curve_degree(key: &GwKey) -> Option<u32> {
    (key.r() == 2 && key.degree() >= 1 && *key == GwKey::plane_curves(key.degree())).then_some(key.degree())
}

/// `(key, weight, N_d)` for each term, if every term is a plane-curve count.
fn closed_terms(comb: &LinComb<GwKey>) -> Option<Vec<(String, Rational, Rational)>> {
    let degrees: Vec<(&GwKey, &Rational, u32)> =
        comb.iter().map(|(k, w)| plane_curve_degree(k).map(|d| (k, w, d))).collect::<Option<_>>()?;
    let table = NTable::up_to(degrees.iter().map(|(_, _, d)| *d).max().unwrap_or(0));
    Some(
        degrees
            .into_iter()
            .map(|(k, w, d)| (format_key(k), w.clone(), table.get(d).expect("table covers d").clone()))
            .collect(),
    )
}

pub fn gw(out: &mut impl Write, a: &GwArgs) -> Result<(), CliError> {
    match (&a.expr, a.p2_table) {
        (None, Some(max)) => p2_table(out, a, max),
        (Some(expr), None) => gw_expr(out, a, expr),
        _ => Err(CliError::Usage("give either an invariant or --p2-table D".into())),
    }
}

fn p2_table(out: &mut impl Write, a: &GwArgs, max: u32) -> Result<(), CliError> {
    if a.r != 2 {
        return Err(CliError::Usage("--p2-table is a table for P^2; drop --r or use --r 2".into()));
    }
    let engine = a.engine.unwrap_or_default();
    let closed = (engine != Engine::Reduction).then(|| NTable::up_to(max));
    let mut session = session_for(2, a.oracle.as_deref(), false)?;
    let mut rows = Vec::new();
    for d in 1..=max {
        let key = GwKey::plane_curves(d);
        let reduced = if engine == Engine::Closed { None } else { Some(session.evaluate(&key)?) };
        let closed = closed.as_ref().map(|t| t.get(d).expect("table covers d").clone());
        let value = match (closed, reduced) {
            (Some(c), Some(r)) if c != r => {
                return Err(CliError::Mismatch(format!("N_{d}: closed recursion {c}, reduction {r}")))
            }
            (Some(v), _) | (None, Some(v)) => v,
            (None, None) => unreachable!("some engine runs"),
        };
        rows.push((d, format_key(&key), value));
    }
    let entries = rows.iter().map(|(_, k, v)| (k.clone(), v.to_string())).collect();
    sync_cache(&a.cache, &gw_theory(2), entries)?;
    match a.format {
        Format::Text => {
            writeln!(out, "d\tN_d").map_err(io)?;
            for (d, _, v) in &rows {
                writeln!(out, "{d}\t{v}").map_err(io)?;
            }
        }
        Format::Json => print_json(
            out,
            &json!({
                "engine": format!("{engine:?}").to_lowercase(),
                "rows": rows.iter().map(|(d, k, v)| json!({"d": d, "key": k, "value": v.to_string()})).collect::<Vec<_>>(),
            }),
        )?,
        Format::Csv => write_csv(out, rows.iter().map(|(_, k, v)| (k.as_str(), v)))?,
    }
    Ok(())
}

fn gw_expr(out: &mut impl Write, a: &GwArgs, expr: &str) -> Result<(), CliError> {
    let text = lang::parse_invariant_expr(expr)?.to_string();
    let comb = lang::parse_gw_invariant(expr, a.r)?;
    let closed = closed_terms(&comb);
    let engine = match (a.engine, &closed) {
        (Some(e), _) => e,
        (None, Some(_)) => Engine::Both,
        (None, None) => Engine::Reduction,
    };
    let closed = match (engine, closed) {
        (Engine::Reduction, _) => None,
        (_, Some(terms)) => {
            let value = terms.iter().map(|(_, w, v)| w * v).sum();
            Some(Evaluated { text: text.clone(), value, terms, traces: Vec::new() })
        }
        (_, None) => {
            return Err(CliError::Usage(format!(
                "the closed engine only knows N_d = ((H^2)^(3d-1)) @ d on P^2; {text} needs --engine reduction"
            )))
        }
    };
    let result = match (engine, closed) {
        (Engine::Closed, Some(c)) => c,
        (_, closed) => {
            let mut session = session_for(a.r, a.oracle.as_deref(), a.trace)?;
            let reduced = evaluate_all(text, &comb, |k| Ok((session.evaluate(k)?, session.trace(k))))?;
            if let Some(c) = closed.filter(|c| c.value != reduced.value) {
                return Err(CliError::Mismatch(format!(
                    "{}: closed recursion {}, reduction {}",
                    reduced.text, c.value, reduced.value
                )));
            }
            reduced
        }
    };
    let theory = gw_theory(a.r);
    sync_cache(&a.cache, &theory, result.entries())?;
    result.print(out, a.format, &theory, json!({"engine": format!("{engine:?}").to_lowercase()}))
}

pub fn cache_show(out: &mut impl Write, path: &Path, format: Format) -> Result<(), CliError> {
    let file = Cache::new(path).load()?.ok_or_else(|| CliError::Usage(format!("no cache at {}", path.display())))?;
    match format {
        Format::Text => {
            writeln!(out, "# {} ({} entries)", file.theory, file.entries.len()).map_err(io)?;
            for (k, v) in &file.entries {
                writeln!(out, "{k}\t{v}").map_err(io)?;
            }
        }
        Format::Json => write!(out, "{}", file.to_json()).map_err(io)?,
        Format::Csv => {
            let values = file
                .entries
                .iter()
                .map(|(k, v)| v.parse::<Rational>().map(|v| (k.as_str(), v)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Usage(format!("corrupt cache {}: non-rational value", path.display())))?;
            write_csv(out, values.iter().map(|(k, v)| (*k, v)))?;
        }
    }
    Ok(())
}

type Evaluator = dyn FnMut(&str) -> Result<Rational, CliError>;

enum Theory {
    Qk(u32, JConvention),
    Gw(u32),
}

fn parse_theory(tag: &str) -> Option<Theory> {
    let parts: Vec<&str> = tag.split(':').collect();
    let r = |s: &str| s.strip_prefix("r=")?.parse::<u32>().ok();
    match parts.as_slice() {
        ["qk", rr, "standard"] => Some(Theory::Qk(r(rr)?, JConvention::Standard)),
        ["qk", rr, "geometric"] => Some(Theory::Qk(r(rr)?, JConvention::Geometric)),
        ["gw", rr] => Some(Theory::Gw(r(rr)?)),
        _ => None,
    }
}

pub fn cache_verify(out: &mut impl Write, path: &Path, oracle: Option<&Path>) -> Result<(), CliError> {
    let file = Cache::new(path).load()?.ok_or_else(|| CliError::Usage(format!("no cache at {}", path.display())))?;
    let theory =
        parse_theory(&file.theory).ok_or_else(|| CliError::Usage(format!("unknown theory tag {:?}", file.theory)))?;
    let mut evaluate: Box<Evaluator> = match theory {
        Theory::Qk(r, c) => {
            let mut s = QkSession::new(r)?.with_convention(c);
            Box::new(move |text| Ok(s.evaluate(&lang::parse_qk_key(text, r)?)?))
        }
        Theory::Gw(r) => {
            let mut s = session_for(r, oracle, false)?;
            Box::new(move |text| Ok(s.evaluate(&lang::parse_gw_key(text, r)?)?))
        }
    };
    let mut bad = Vec::new();
    for (key, stored) in &file.entries {
        let stored: Rational =
            stored.parse().map_err(|_| CliError::Usage(format!("{key}: stored value {stored:?} is not rational")))?;
        let value = evaluate(key)?;
        if value != stored {
            bad.push(format!("{key}: cache holds {stored}, computed {value}"));
        }
    }
    if bad.is_empty() {
        writeln!(out, "verified {} entries", file.entries.len()).map_err(io)?;
        Ok(())
    } else {
        for b in &bad {
            writeln!(out, "MISMATCH {b}").map_err(io)?;
        }
        Err(CliError::Conflict(format!("{} of {} entries differ", bad.len(), file.entries.len())))
    }
}
