//! JSON and text descriptors for rules, potentials, quadratic irrationals and
//! digit lists.
//!
//! Every parser here returns [`Error::Descriptor`] on bad input and never panics.

use crate::coding::Endpoint;
use crate::error::{Error, Result};
use crate::interval::CertifiedInterval;
use crate::minus_cf::CFValue;
use crate::potential::{CylinderPotential, Term};
use crate::quadratic::Quadratic;
use crate::shift::{Symbol, TransitionRule, DEFAULT_SYMBOL_CAP};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

/// Largest cylinder depth a descriptor may request.
pub const MAX_DEPTH: usize = 4;

/// Longest digit list accepted from text.
pub const MAX_DIGITS: usize = 10_000;

/// Largest accepted radicand.
pub const MAX_RADICAND: i64 = 1_000_000_000_000_000_000;

/// Longest decimal string accepted for a big integer.
const MAX_INT_CHARS: usize = 400;

fn bad(msg: impl Into<String>) -> Error {
    Error::Descriptor(msg.into())
}

fn symbol(v: u64, what: &str) -> Result<Symbol> {
    if v == 0 || v > DEFAULT_SYMBOL_CAP {
        return Err(bad(format!("{what} {v} outside 1..={DEFAULT_SYMBOL_CAP}")));
    }
    Ok(v)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    alphabet_min: u64,
    #[serde(default)]
    forbidden_pairs: Vec<[u64; 2]>,
    #[serde(default)]
    alphabet_max: Option<u64>,
}

/// Parse `{alphabet_min, forbidden_pairs: [[i,j],...], alphabet_max?}`.
pub fn parse_rule(text: &str) -> Result<TransitionRule> {
    let doc: RuleDoc = serde_json::from_str(text).map_err(|e| bad(format!("rule: {e}")))?;
    let min = symbol(doc.alphabet_min, "alphabet_min")?;
    let max = doc.alphabet_max.map(|m| symbol(m, "alphabet_max")).transpose()?;
    let mut pairs = Vec::with_capacity(doc.forbidden_pairs.len());
    for [i, j] in doc.forbidden_pairs {
        pairs.push((symbol(i, "forbidden symbol")?, symbol(j, "forbidden symbol")?));
    }
    TransitionRule::new(min, pairs, max).map_err(|e| match e {
        Error::Descriptor(m) => Error::Descriptor(m),
        other => bad(other.to_string()),
    })
}

/// The rule as a descriptor object.
pub fn rule_to_json(rule: &TransitionRule) -> Value {
    let pairs: Vec<Value> = rule.forbidden_pairs.iter().map(|&(i, j)| json!([i, j])).collect();
    let mut obj = Map::new();
    obj.insert("alphabet_min".into(), json!(rule.alphabet_min));
    obj.insert("forbidden_pairs".into(), Value::Array(pairs));
    if let Some(m) = rule.alphabet_max {
        obj.insert("alphabet_max".into(), json!(m));
    }
    Value::Object(obj)
}

/// A parsed potential descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialDescriptor {
    pub potential: CylinderPotential,
    /// Truncation level requested by the descriptor, if any.
    pub cutoff: Option<Symbol>,
}

fn finite_num(params: &Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        None => default.ok_or_else(|| bad(format!("missing parameter '{key}'"))),
        Some(v) => {
            let x = v.as_f64().ok_or_else(|| bad(format!("parameter '{key}' is not a number")))?;
            if !x.is_finite() {
                return Err(bad(format!("parameter '{key}' is not finite")));
            }
            Ok(x)
        }
    }
}

fn only_keys(params: &Map<String, Value>, allowed: &[&str], family: &str) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(bad(format!("unknown parameter '{k}' for family {family}"))),
        None => Ok(()),
    }
}

fn interval_value(v: &Value) -> Result<CertifiedInterval> {
    let pair = match v {
        Value::Number(_) => {
            let x = v.as_f64().unwrap_or(f64::NAN);
            (x, x)
        }
        Value::Array(a) if a.len() == 2 => {
            (a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN))
        }
        Value::Object(o) => (
            o.get("lower").and_then(Value::as_f64).unwrap_or(f64::NAN),
            o.get("upper").and_then(Value::as_f64).unwrap_or(f64::NAN),
        ),
        _ => return Err(bad("table value must be a number, [lo, hi] or {lower, upper}")),
    };
    if !pair.0.is_finite() || !pair.1.is_finite() {
        return Err(bad("table value is not a finite number"));
    }
    CertifiedInterval::try_new(pair.0, pair.1)
        .ok_or_else(|| bad(format!("table interval [{}, {}] is inverted", pair.0, pair.1)))
}

fn table_term(params: &Map<String, Value>) -> Result<Term> {
    only_keys(params, &["values"], "table")?;
    let values = params
        .get("values")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("table needs an object 'values' keyed by comma-separated words"))?;
    if values.is_empty() {
        return Err(bad("table has no entries"));
    }
    let mut out = BTreeMap::new();
    let mut depth = None;
    for (key, v) in values {
        let word: Vec<Symbol> = parse_digits(key)?
            .into_iter()
            .map(|d| u64::try_from(d).map_err(|_| bad(format!("negative symbol in '{key}'"))))
            .collect::<Result<_>>()?;
        for &s in &word {
            symbol(s, "table symbol")?;
        }
        if *depth.get_or_insert(word.len()) != word.len() {
            return Err(bad("table words have different lengths"));
        }
        out.insert(word, interval_value(v)?);
    }
    let depth = depth.unwrap_or(1);
    if depth > MAX_DEPTH {
        return Err(bad(format!("table depth {depth} exceeds {MAX_DEPTH}")));
    }
    Ok(Term::Table { depth, values: out })
}

fn term(family: &str, params: &Map<String, Value>, nesting: usize) -> Result<Vec<Term>> {
    Ok(match family {
        "tau" => {
            only_keys(params, &["coef"], family)?;
            vec![Term::Tau { coef: finite_num(params, "coef", Some(1.0))? }]
        }
        "power_log" => {
            only_keys(params, &["a", "b"], family)?;
            vec![Term::PowerLog {
                a: finite_num(params, "a", None)?,
                b: finite_num(params, "b", Some(0.0))?,
            }]
        }
        "constant" => {
            only_keys(params, &["value"], family)?;
            vec![Term::Constant { value: finite_num(params, "value", None)? }]
        }
        "geometric" => {
            only_keys(params, &["intercept", "slope"], family)?;
            vec![Term::Geometric {
                intercept: finite_num(params, "intercept", Some(0.0))?,
                slope: finite_num(params, "slope", None)?,
            }]
        }
        "table" => vec![table_term(params)?],
        "sum" => {
            if nesting > 0 {
                return Err(bad("nested 'sum' families are not supported"));
            }
            only_keys(params, &["terms"], family)?;
            let parts = params
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("sum needs an array 'terms'"))?;
            let mut terms = Vec::new();
            for p in parts {
                let obj = p.as_object().ok_or_else(|| bad("sum term must be an object"))?;
                only_keys(obj, &["family", "params"], "sum term")?;
                let fam = obj
                    .get("family")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("sum term needs a 'family'"))?;
                let empty = Map::new();
                let sub = match obj.get("params") {
                    None => &empty,
                    Some(Value::Object(m)) => m,
                    Some(_) => return Err(bad("'params' must be an object")),
                };
                terms.extend(term(fam, sub, nesting + 1)?);
            }
            terms
        }
        other => return Err(bad(format!("unknown potential family '{other}'"))),
    })
}

/// Parse `{"depth": k, "family": ..., "params": {...}, "cutoff": N, "hoelder": [K, θ]?}`.
///
/// Families: `tau {coef}`, `power_log {a, b}`, `constant {value}`,
/// `geometric {intercept, slope}`, `table {values: {"i,j": [lo, hi]}}` and
/// `sum {terms: [{family, params}, ...]}`.
pub fn parse_potential(text: &str) -> Result<PotentialDescriptor> {
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(format!("potential: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| bad("potential descriptor must be an object"))?;
    only_keys(obj, &["depth", "family", "params", "cutoff", "hoelder"], "descriptor")?;
    let family = obj
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("potential needs a string 'family'"))?;
    let empty = Map::new();
    let params = match obj.get("params") {
        None => &empty,
        Some(Value::Object(m)) => m,
        Some(_) => return Err(bad("'params' must be an object")),
    };
    let depth = match obj.get("depth") {
        None => 1,
        Some(v) => v.as_u64().ok_or_else(|| bad("'depth' must be a positive integer"))?,
    };
    if depth == 0 || depth > MAX_DEPTH as u64 {
        return Err(bad(format!("depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let cutoff = match obj.get("cutoff") {
        None | Some(Value::Null) => None,
        Some(v) => Some(symbol(
            v.as_u64().ok_or_else(|| bad("'cutoff' must be a positive integer"))?,
            "cutoff",
        )?),
    };
    let hoelder = match obj.get("hoelder") {
        None | Some(Value::Null) => None,
        Some(Value::Array(a)) if a.len() == 2 => {
            let k = a[0].as_f64().filter(|x| x.is_finite() && *x >= 0.0);
            let th = a[1].as_f64().filter(|x| (0.0..1.0).contains(x));
            match (k, th) {
                (Some(k), Some(th)) => Some((k, th)),
                _ => return Err(bad("'hoelder' needs K >= 0 and 0 <= theta < 1")),
            }
        }
        Some(_) => return Err(bad("'hoelder' must be [K, theta]")),
    };
    let mut potential = CylinderPotential::from_terms(term(family, params, 0)?);
    if potential.depth > depth as usize {
        return Err(bad(format!(
            "table depth {} exceeds declared depth {depth}",
            potential.depth
        )));
    }
    potential.depth = depth as usize;
    potential.hoelder = hoelder;
    Ok(PotentialDescriptor { potential, cutoff })
}

/// Parse a comma-separated integer list such as `"6,3"`.
pub fn parse_digits(text: &str) -> Result<Vec<i64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(bad("empty digit list"));
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        if out.len() >= MAX_DIGITS {
            return Err(bad(format!("more than {MAX_DIGITS} digits")));
        }
        let p = part.trim();
        out.push(p.parse::<i64>().map_err(|_| bad(format!("'{p}' is not an integer")))?);
    }
    Ok(out)
}

fn big_int(v: &Value, key: &str) -> Result<BigInt> {
    let s = match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(bad(format!("'{key}' must be an integer or integer string"))),
    };
    if s.is_empty() || s.len() > MAX_INT_CHARS {
        return Err(bad(format!("'{key}' has invalid length")));
    }
    s.parse::<BigInt>().map_err(|_| bad(format!("'{key}' is not an integer")))
}

fn fraction(obj: &Map<String, Value>, num: &str, den: &str) -> Result<BigRational> {
    let n = match obj.get(num) {
        Some(v) => big_int(v, num)?,
        None => BigInt::zero(),
    };
    let d = match obj.get(den) {
        Some(v) => big_int(v, den)?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(bad(format!("'{den}' is zero")));
    }
    Ok(BigRational::new(n, d))
}

/// Parse `{p_num, p_den, q_num, q_den, d}` as `p_num/p_den + (q_num/q_den)·√d`.
pub fn parse_quadratic_value(v: &Value) -> Result<Quadratic> {
    let obj = v.as_object().ok_or_else(|| bad("quadratic must be an object"))?;
    only_keys(obj, &["p_num", "p_den", "q_num", "q_den", "d"], "quadratic")?;
    let a = fraction(obj, "p_num", "p_den")?;
    let b = fraction(obj, "q_num", "q_den")?;
    let d = match obj.get("d") {
        Some(v) => big_int(v, "d")?,
        None if b.is_zero() => BigInt::from(1),
        None => return Err(bad("missing radicand 'd'")),
    };
    if !d.is_positive() || d > BigInt::from(MAX_RADICAND) {
        return Err(bad(format!("radicand {d} outside 1..={MAX_RADICAND}")));
    }
    Quadratic::new(a, b, d).map_err(|e| bad(e.to_string()))
}

pub fn parse_quadratic(text: &str) -> Result<Quadratic> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("quadratic: {e}")))?;
    parse_quadratic_value(&v)
}

/// An endpoint given as a quadratic object (exact) or a decimal string/number.
///
/// Decimals are enclosed by the neighbouring floats of their nearest `f64`.
pub fn parse_endpoint(text: &str) -> Result<Endpoint> {
    let t = text.trim();
    if t.starts_with('{') {
        return parse_quadratic(t).map(Endpoint::Exact);
    }
    let t = t.trim_matches('"');
    if t.is_empty() || t.len() > MAX_INT_CHARS {
        return Err(bad("endpoint has invalid length"));
    }
    let x: f64 = t.parse().map_err(|_| bad(format!("'{t}' is not a decimal")))?;
    if !x.is_finite() {
        return Err(bad("endpoint is not finite"));
    }
    Ok(Endpoint::Real(CertifiedInterval::around(x)))
}

pub fn quadratic_to_json(q: &Quadratic) -> Value {
    json!({
        "p_num": q.a.numer().to_string(),
        "p_den": q.a.denom().to_string(),
        "q_num": q.b.numer().to_string(),
        "q_den": q.b.denom().to_string(),
        "d": q.d.to_string(),
    })
}

/// `{lower, upper, exact?}` for a continued-fraction value.
pub fn cf_value_to_json(v: &CFValue) -> Value {
    let mut obj = Map::new();
    obj.insert("lower".into(), json!(v.value.lower));
    obj.insert("upper".into(), json!(v.value.upper));
    if let Some(q) = &v.exact {
        obj.insert("exact".into(), quadratic_to_json(q));
    }
    Value::Object(obj)
}
