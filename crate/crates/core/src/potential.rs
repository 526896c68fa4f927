//! Cylinder potentials: interval values on cylinders plus an explicit model of
//! the potential on 1-cylinders of large symbols.

use crate::error::{Error, Result};
use crate::interval::{down, up, CertifiedInterval};
use crate::minus_cf::{eval_pattern, tail_sup, worst_case_tail, Digit};
use crate::shift::Symbol;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One additive component of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Term {
    /// `coef · τ` with `τ = 2 log w`.
    Tau { coef: f64 },
    /// `−a log n₁ − b log log n₁`.
    PowerLog { a: f64, b: f64 },
    /// A constant.
    Constant { value: f64 },
    /// `intercept + slope · n₁`, i.e. geometric weights `e^{intercept} (e^{slope})^{n₁}`.
    Geometric { intercept: f64, slope: f64 },
    /// Explicit intervals on words of a fixed length; no tail.
    Table { depth: usize, values: BTreeMap<Vec<Symbol>, CertifiedInterval> },
}

/// A potential given by a sum of terms, evaluated on cylinders as intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderPotential {
    /// Smallest cylinder depth on which the potential can be evaluated.
    pub depth: usize,
    pub terms: Vec<Term>,
    /// Optional variation bound `V_n ≤ K θⁿ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hoelder: Option<(f64, f64)>,
}

impl CylinderPotential {
    pub fn zero() -> Self {
        CylinderPotential { depth: 1, terms: Vec::new(), hoelder: None }
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let depth = terms
            .iter()
            .map(|t| match t {
                Term::Table { depth, .. } => *depth,
                _ => 1,
            })
            .max()
            .unwrap_or(1);
        CylinderPotential { depth, terms, hoelder: None }.merged()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term::Constant { value: c }])
    }

    pub fn tau(coef: f64) -> Self {
        Self::from_terms(vec![Term::Tau { coef }])
    }

    /// Collapse repeated `Tau`/`Constant`/`PowerLog` terms into one each.
    fn merged(mut self) -> Self {
        let mut tau = None::<f64>;
        let mut cst = None::<f64>;
        let mut pl = None::<(f64, f64)>;
        let mut rest = Vec::new();
        for t in self.terms.drain(..) {
            match t {
                Term::Tau { coef } => *tau.get_or_insert(0.0) += coef,
                Term::Constant { value } => *cst.get_or_insert(0.0) += value,
                Term::PowerLog { a, b } => {
                    let e = pl.get_or_insert((0.0, 0.0));
                    e.0 += a;
                    e.1 += b;
                }
                other => rest.push(other),
            }
        }
        let mut terms = Vec::new();
        if let Some(coef) = tau {
            terms.push(Term::Tau { coef });
        }
        if let Some((a, b)) = pl {
            terms.push(Term::PowerLog { a, b });
        }
        if let Some(value) = cst {
            terms.push(Term::Constant { value });
        }
        terms.extend(rest);
        self.terms = terms;
        self
    }

    /// `self + coef · τ`.
    pub fn plus_tau(&self, coef: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(Term::Tau { coef });
        CylinderPotential { terms, ..self.clone() }.merged()
    }

    /// `self + c`.
    pub fn plus_constant(&self, c: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(Term::Constant { value: c });
        CylinderPotential { terms, ..self.clone() }.merged()
    }

    /// `self + other`.
    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        CylinderPotential {
            depth: self.depth.max(other.depth),
            terms,
            hoelder: self.hoelder.or(other.hoelder),
        }
        .merged()
    }

    pub fn tau_coef(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| if let Term::Tau { coef } = t { *coef } else { 0.0 })
            .sum()
    }

    pub fn has_tau(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Tau { coef } if *coef != 0.0))
    }

    /// Whether every term depends on the first symbol only.
    pub fn is_locally_constant(&self) -> bool {
        self.depth == 1 && !self.has_tau()
    }

    /// Interval of values on the cylinder given by a pattern (tail digits ≥ 3).
    pub fn eval(&self, pattern: &[Digit]) -> Result<CertifiedInterval> {
        if pattern.is_empty() {
            return Err(Error::Domain("empty cylinder pattern".into()));
        }
        let mut acc = CertifiedInterval::point(0.0);
        for t in &self.terms {
            acc = acc + term_value(t, pattern)?;
        }
        Ok(acc)
    }

    /// Interval on the cylinder of an explicit word.
    pub fn eval_word(&self, word: &[Symbol]) -> Result<CertifiedInterval> {
        let p: Vec<Digit> = word.iter().map(|&s| Digit::Sym(s)).collect();
        self.eval(&p)
    }

    /// Exponent model of `e^{φ}` on 1-cylinders `C_n`, `n ≥ from`.
    pub fn tail_model(&self, from: Symbol) -> Result<TailModel> {
        let mut m = TailModel { log_k: CertifiedInterval::point(0.0), s: 0.0, b: 0.0, beta: 0.0, from };
        let y = tail_sup(3);
        let mf = from as f64;
        for t in &self.terms {
            match *t {
                Term::Tau { coef } => {
                    if from < 3 {
                        return Err(Error::Domain("tau tail needs symbols >= 3".into()));
                    }
                    // τ(C_n) ∈ [2 log(n − y), 2 log n] and (n − y)/n ∈ [(M − y)/M, 1].
                    m.s -= 2.0 * coef;
                    let r = 2.0 * coef * (down((mf - y) / mf)).ln();
                    m.log_k = m.log_k + CertifiedInterval::new(r.min(0.0), r.max(0.0));
                }
                Term::PowerLog { a, b } => {
                    m.s += a;
                    m.b += b;
                }
                Term::Constant { value } => {
                    m.log_k = m.log_k + CertifiedInterval::point(value);
                }
                Term::Geometric { intercept, slope } => {
                    m.log_k = m.log_k + CertifiedInterval::point(intercept);
                    m.beta += slope;
                }
                Term::Table { .. } => {
                    return Err(Error::TailNotCertifiable(
                        "table potentials carry no tail model".into(),
                    ))
                }
            }
        }
        Ok(m)
    }
}

fn term_value(t: &Term, pattern: &[Digit]) -> Result<CertifiedInterval> {
    match t {
        Term::Tau { coef } => {
            let w = eval_pattern(pattern, worst_case_tail())?;
            let tau = if w.upper.is_infinite() {
                CertifiedInterval::new(down(2.0 * w.lower.ln()), f64::INFINITY)
            } else {
                w.ln().scale(2.0)
            };
            Ok(scale_ext(tau, *coef))
        }
        Term::PowerLog { a, b } => power_log_range(*a, *b, pattern[0]),
        Term::Constant { value } => Ok(CertifiedInterval::point(*value)),
        Term::Geometric { intercept, slope } => {
            let (lo, hi) = match pattern[0] {
                Digit::Sym(n) => (n as f64, n as f64),
                Digit::Tail { from } => (from as f64, f64::INFINITY),
            };
            let a = intercept + slope * lo;
            let b = if hi.is_infinite() {
                if *slope > 0.0 {
                    f64::INFINITY
                } else if *slope < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    *intercept
                }
            } else {
                intercept + slope * hi
            };
            Ok(CertifiedInterval::new(down(a.min(b)), up(a.max(b))))
        }
        Term::Table { depth, values } => {
            if pattern.len() < *depth {
                return Err(Error::Domain(format!(
                    "table potential needs cylinders of depth >= {depth}"
                )));
            }
            let mut key = Vec::with_capacity(*depth);
            for d in &pattern[..*depth] {
                match d {
                    Digit::Sym(s) => key.push(*s),
                    Digit::Tail { .. } => {
                        return Err(Error::TailNotCertifiable(
                            "table potential evaluated on a tail cylinder".into(),
                        ))
                    }
                }
            }
            values
                .get(&key)
                .copied()
                .ok_or_else(|| Error::Domain(format!("table potential has no value for {key:?}")))
        }
    }
}

/// `c · x` for an interval that may have an infinite upper end.
fn scale_ext(x: CertifiedInterval, c: f64) -> CertifiedInterval {
    if x.is_finite() {
        return x.scale(c);
    }
    if c == 0.0 {
        return CertifiedInterval::point(0.0);
    }
    let lo = down(x.lower * c);
    if c > 0.0 {
        CertifiedInterval::new(lo.min(up(x.lower * c)), f64::INFINITY)
    } else {
        CertifiedInterval::new(f64::NEG_INFINITY, up(x.lower * c))
    }
}

/// Range of `−a log n − b log log n` over a digit or digit range.
fn power_log_range(a: f64, b: f64, d: Digit) -> Result<CertifiedInterval> {
    let g = |l: f64| -a * l - if b == 0.0 { 0.0 } else { b * l.ln() };
    match d {
        Digit::Sym(n) => {
            if (b != 0.0 && n < 2) || (a != 0.0 && n < 1) {
                return Err(Error::Domain(format!("log log undefined at symbol {n}")));
            }
            let v = g((n as f64).ln());
            Ok(CertifiedInterval::new(down(v), up(v)))
        }
        Digit::Tail { from } => {
            if from < 2 {
                return Err(Error::Domain("power_log tail must start at 2 or above".into()));
            }
            let l0 = (from as f64).ln();
            let mut cands = vec![g(l0)];
            // Stationary point of g in L = log n.
            if a != 0.0 {
                let ls = -b / a;
                if ls > l0 {
                    cands.push(g(ls));
                }
            }
            let limit = if a > 0.0 || (a == 0.0 && b > 0.0) {
                f64::NEG_INFINITY
            } else if a < 0.0 || (a == 0.0 && b < 0.0) {
                f64::INFINITY
            } else {
                0.0
            };
            cands.push(limit);
            let lo = cands.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(CertifiedInterval::new(down(lo), up(hi)))
        }
    }
}

/// `e^{φ(C_n)} ∈ e^{log_k} · n^{−s} (log n)^{−b} e^{βn}` for all `n ≥ from`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailModel {
    pub log_k: CertifiedInterval,
    pub s: f64,
    pub b: f64,
    pub beta: f64,
    pub from: Symbol,
}

impl TailModel {
    /// `log` of the model without the constant, at real `x ≥ 2`.
    pub fn log_shape(&self, x: f64) -> f64 {
        let mut v = -self.s * x.ln() + self.beta * x;
        if self.b != 0.0 {
            v -= self.b * x.ln().ln();
        }
        v
    }

    /// Whether `Σ_{n ≥ from} e^{φ(C_n)}` converges.
    pub fn converges(&self) -> bool {
        self.beta < 0.0
            || (self.beta == 0.0 && (self.s > 1.0 || (self.s == 1.0 && self.b > 1.0)))
    }

    /// Same model with `coef · τ` added (`s` drops by `2 coef`).
    pub fn with_tau(&self, coef: f64) -> TailModel {
        let y = tail_sup(3);
        let mf = self.from as f64;
        let r = 2.0 * coef * (down((mf - y) / mf)).ln();
        TailModel {
            log_k: self.log_k + CertifiedInterval::new(r.min(0.0), r.max(0.0)),
            s: self.s - 2.0 * coef,
            ..*self
        }
    }
}
