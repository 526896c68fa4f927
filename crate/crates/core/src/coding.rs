//! Arithmetic and geometric codes of geodesics on the modular surface.
//!
//! The geometric code is obtained by renormalization: the oriented geodesic
//! from `α` to `β` is kept inside the fundamental region
//! `F = {|z| ≥ 1, |Re z| ≤ 1/2}` by applying `z ↦ z ∓ 1` whenever it leaves
//! through a vertical side and `z ↦ −1/z` whenever it leaves through the arc.
//! Every exit decision is a sign test on expressions in the endpoints.

use crate::error::{Error, Result};
use crate::interval::{down, up, CertifiedInterval};
use crate::minus_cf::{expand_minus_cf, expand_minus_cf_real, periodic_value};
use crate::quadratic::Quadratic;
use crate::shift::TransitionRule;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Arithmetic,
    Geometric,
}

/// A window of a bi-infinite code, or one period of a periodic code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicCode {
    pub code: Vec<i64>,
    pub kind: CodeKind,
    pub periodic: bool,
}

/// An endpoint known exactly or through a certified enclosure.
#[derive(Clone, Debug, PartialEq)]
pub enum Endpoint {
    Exact(Quadratic),
    Real(CertifiedInterval),
}

impl Endpoint {
    pub fn to_interval(&self) -> CertifiedInterval {
        match self {
            Endpoint::Exact(q) => q.to_interval(),
            Endpoint::Real(x) => *x,
        }
    }
}

/// Oriented geodesic from `u` to `w` on the upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicEndpoints {
    pub u: Endpoint,
    pub w: Endpoint,
}

impl GeodesicEndpoints {
    pub fn exact(u: Quadratic, w: Quadratic) -> Self {
        GeodesicEndpoints { u: Endpoint::Exact(u), w: Endpoint::Exact(w) }
    }

    /// `0 < u < 1 < w`, decided exactly or certified from enclosures.
    pub fn is_reduced(&self) -> Result<bool> {
        match (&self.u, &self.w) {
            (Endpoint::Exact(u), Endpoint::Exact(w)) => Ok(u.cmp_int(0) == Ordering::Greater
                && u.cmp_int(1) == Ordering::Less
                && w.cmp_int(1) == Ordering::Greater),
            _ => {
                let (u, w) = (self.u.to_interval(), self.w.to_interval());
                let yes = u.lower > 0.0 && u.upper < 1.0 && w.lower > 1.0;
                let no = u.upper <= 0.0 || u.lower >= 1.0 || w.upper <= 1.0;
                if yes || no {
                    Ok(yes)
                } else {
                    Err(Error::UndecidableCrossing("reducedness within rounding slop".into()))
                }
            }
        }
    }
}

/// Scalars the tracer can run on: exact field elements or enclosures.
pub trait TraceScalar: Clone + Sized {
    fn from_ratio(p: i64, q: i64) -> Self;
    fn add(&self, o: &Self) -> Result<Self>;
    fn sub(&self, o: &Self) -> Result<Self>;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn div(&self, o: &Self) -> Result<Self>;
    fn add_int(&self, k: i64) -> Self;
    fn sign(&self) -> Result<Ordering>;
    fn floor(&self) -> Result<i64>;

    fn neg_recip(&self) -> Result<Self> {
        Self::from_ratio(-1, 1).div(self)
    }
}

impl TraceScalar for Quadratic {
    fn from_ratio(p: i64, q: i64) -> Self {
        Quadratic::rational(BigRational::new(p.into(), q.into()))
    }
    fn add(&self, o: &Self) -> Result<Self> {
        Quadratic::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        Quadratic::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        Quadratic::mul(self, o)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Quadratic::div(self, o)
    }
    fn add_int(&self, k: i64) -> Self {
        Quadratic::add_int(self, k)
    }
    fn sign(&self) -> Result<Ordering> {
        Ok(self.signum())
    }
    fn floor(&self) -> Result<i64> {
        Quadratic::floor(self)
            .to_i64()
            .ok_or_else(|| Error::Domain("translation out of range".into()))
    }
}

/// Interval scalar for best-effort tracing of floating endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx(pub CertifiedInterval);

impl Approx {
    fn of(lo: f64, hi: f64) -> Result<Self> {
        CertifiedInterval::try_new(down(lo), up(hi))
            .map(Approx)
            .ok_or_else(|| Error::UndecidableCrossing("lost all precision".into()))
    }
}

impl TraceScalar for Approx {
    fn from_ratio(p: i64, q: i64) -> Self {
        let x = p as f64 / q as f64;
        if x * q as f64 == p as f64 {
            Approx(CertifiedInterval::point(x))
        } else {
            Approx(CertifiedInterval::around(x))
        }
    }
    fn add(&self, o: &Self) -> Result<Self> {
        Ok(Approx(self.0 + o.0))
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        Ok(Approx(self.0 - o.0))
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        let (a, b) = (self.0, o.0);
        let p = [a.lower * b.lower, a.lower * b.upper, a.upper * b.lower, a.upper * b.upper];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Approx::of(lo, hi)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let b = o.0;
        if b.lower <= 0.0 && b.upper >= 0.0 {
            return Err(Error::UndecidableCrossing("division by an interval containing 0".into()));
        }
        let r = Approx::of(1.0 / b.upper, 1.0 / b.lower)?;
        self.mul(&r)
    }
    fn add_int(&self, k: i64) -> Self {
        Approx(self.0 + CertifiedInterval::point(k as f64))
    }
    fn sign(&self) -> Result<Ordering> {
        let x = self.0;
        if x.lower > 0.0 {
            Ok(Ordering::Greater)
        } else if x.upper < 0.0 {
            Ok(Ordering::Less)
        } else if x.lower == 0.0 && x.upper == 0.0 {
            Ok(Ordering::Equal)
        } else {
            Err(Error::UndecidableCrossing(format!("sign of {x} is not determined")))
        }
    }
    fn floor(&self) -> Result<i64> {
        let (a, b) = (self.0.lower.floor(), self.0.upper.floor());
        if a != b || !a.is_finite() {
            return Err(Error::UndecidableCrossing(format!("floor of {} is not determined", self.0)));
        }
        Ok(a as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Arc,
    Right,
    Left,
}

const MAX_REDUCTIONS: usize = 10_000;

fn apply_s<T: TraceScalar>(al: &T, be: &T) -> Result<(T, T)> {
    Ok((al.neg_recip()?, be.neg_recip()?))
}

/// Move the geodesic by the modular group until it meets `F`.
fn reduce_into_f<T: TraceScalar>(mut al: T, mut be: T) -> Result<(T, T)> {
    let half = T::from_ratio(1, 2);
    for _ in 0..MAX_REDUCTIONS {
        let center = al.add(&be)?.mul(&half)?;
        let m = center.add(&half)?.floor()?;
        al = al.add_int(-m);
        be = be.add_int(-m);
        let top = al.mul(&al)?.add(&be.mul(&be)?)?.mul(&half)?.add_int(-1);
        if top.sign()? == Ordering::Less {
            (al, be) = apply_s(&al, &be)?;
        } else {
            return Ok((al, be));
        }
    }
    Err(Error::Domain("geodesic did not reach the fundamental region".into()))
}

/// Which side of `F` the forward ray leaves through.
fn exit_side<T: TraceScalar>(al: &T, be: &T) -> Result<Move> {
    let right = be.sub(al)?.sign()? == Ordering::Greater;
    let inside_disk = be.add_int(-1).sign()? == Ordering::Less && be.add_int(1).sign()? == Ordering::Greater;
    if inside_disk {
        let s = al.add(be)?;
        if s.sign()? != Ordering::Equal {
            // Real part where the geodesic meets the unit circle.
            let xc = al.mul(be)?.add_int(1).div(&s)?;
            let half = T::from_ratio(1, 2);
            let to_right = xc.sub(&half)?.sign()?;
            let to_left = xc.add(&half)?.sign()?;
            if to_right == Ordering::Less && to_left == Ordering::Greater {
                return Ok(Move::Arc);
            }
            // A corner hit: the arc wins unless the corner lies ahead.
            if to_right == Ordering::Equal && !right {
                return Ok(Move::Arc);
            }
            if to_left == Ordering::Equal && right {
                return Ok(Move::Arc);
            }
        }
    }
    Ok(if right { Move::Right } else { Move::Left })
}

/// Trace the geodesic `α → β` and return `terms` signed crossing counts.
pub fn trace_geometric<T: TraceScalar>(alpha: T, beta: T, terms: usize) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(terms);
    if terms == 0 {
        return Ok(out);
    }
    let (mut al, mut be) = reduce_into_f(alpha, beta)?;
    let budget = 1_000_000usize.max(terms.saturating_mul(4096));
    let mut started = false;
    let mut count: i64 = 0;
    for _ in 0..budget {
        match exit_side(&al, &be)? {
            Move::Arc => {
                if started && count != 0 {
                    out.push(count);
                    if out.len() == terms {
                        return Ok(out);
                    }
                }
                started = true;
                count = 0;
                (al, be) = apply_s(&al, &be)?;
            }
            Move::Right => {
                count += 1;
                al = al.add_int(-1);
                be = be.add_int(-1);
            }
            Move::Left => {
                count -= 1;
                al = al.add_int(1);
                be = be.add_int(1);
            }
        }
    }
    Err(Error::Domain("step budget exhausted while tracing (does the geodesic reach the cusp?)".into()))
}

/// Geometric code of the geodesic from `u` to `w`.
pub fn geometric_code(g: &GeodesicEndpoints, terms: usize) -> Result<SymbolicCode> {
    let code = match (&g.u, &g.w) {
        (Endpoint::Exact(u), Endpoint::Exact(w)) => {
            if u.is_rational() || w.is_rational() {
                return Err(Error::Domain("rational endpoints run into the cusp".into()));
            }
            trace_geometric(u.clone(), w.clone(), terms)?
        }
        _ => trace_geometric(Approx(g.u.to_interval()), Approx(g.w.to_interval()), terms)?,
    };
    Ok(SymbolicCode { code, kind: CodeKind::Geometric, periodic: false })
}

/// Forward digits from `w`, backward digits from `1/u`, as `n_{−b+1} … n_0 n_1 … n_f`.
pub fn arithmetic_code(
    g: &GeodesicEndpoints,
    terms_forward: usize,
    terms_backward: usize,
) -> Result<SymbolicCode> {
    if !g.is_reduced()? {
        return Err(Error::Domain("endpoints are not reduced (need 0 < u < 1 < w)".into()));
    }
    let (fwd, back) = match (&g.u, &g.w) {
        (Endpoint::Exact(u), Endpoint::Exact(w)) => (
            expand_minus_cf(w, terms_forward)?.digits,
            expand_minus_cf(&u.recip()?, terms_backward)?.digits,
        ),
        _ => {
            let u = g.u.to_interval();
            let inv = CertifiedInterval::new(down(1.0 / u.upper), up(1.0 / u.lower));
            (
                expand_minus_cf_real(g.w.to_interval(), terms_forward)?.digits,
                expand_minus_cf_real(inv, terms_backward)?.digits,
            )
        }
    };
    let code = back.iter().rev().chain(fwd.iter()).map(|&d| d as i64).collect();
    Ok(SymbolicCode { code, kind: CodeKind::Arithmetic, periodic: false })
}

/// Exact endpoints of the geodesic whose arithmetic code repeats `block`.
pub fn endpoints_from_periodic_code(block: &[i64]) -> Result<GeodesicEndpoints> {
    if block.is_empty() || block.iter().any(|&d| d < 2) {
        return Err(Error::Domain("periodic block needs digits >= 2".into()));
    }
    let digits: Vec<u64> = block.iter().map(|&d| d as u64).collect();
    let w = periodic_value(&digits)?;
    let reversed: Vec<u64> = digits.iter().rev().copied().collect();
    let u = periodic_value(&reversed)?.recip()?;
    let g = GeodesicEndpoints::exact(u, w);
    debug_assert!(g.is_reduced().unwrap_or(false));
    Ok(g)
}

/// Whether a code window (or periodic block) is admissible for positive geodesics.
pub fn is_positive(code: &[i64], periodic: bool) -> bool {
    let rule = TransitionRule::positive_geodesic();
    if code.iter().any(|&d| d < 3) {
        return false;
    }
    let ok = |a: i64, b: i64| !rule.forbidden_pairs.contains(&(a as u64, b as u64));
    code.windows(2).all(|p| ok(p[0], p[1]))
        && (!periodic || code.is_empty() || ok(code[code.len() - 1], code[0]))
}

/// Shortest block whose repetition gives `code`.
pub fn primitive_period(code: &[i64]) -> &[i64] {
    let n = code.len();
    for p in 1..=n {
        if n % p == 0 && (p..n).all(|i| code[i] == code[i - p]) {
            return &code[..p];
        }
    }
    code
}

/// Lexicographically least rotation of the primitive period.
pub fn canonical_rotation(code: &[i64]) -> Vec<i64> {
    let base = primitive_period(code);
    (0..base.len())
        .map(|r| base[r..].iter().chain(&base[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Whether two periodic blocks agree up to cyclic shift.
pub fn cyclic_equal(a: &[i64], b: &[i64]) -> bool {
    canonical_rotation(a) == canonical_rotation(b)
}

/// Whether `window` is a stretch of the bi-infinite repetition of `block`.
pub fn window_matches_block(window: &[i64], block: &[i64]) -> bool {
    let p = block.len();
    p > 0 && (0..p).any(|r| window.iter().enumerate().all(|(i, &x)| x == block[(r + i) % p]))
}
