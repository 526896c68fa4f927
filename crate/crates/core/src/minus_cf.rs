//! Minus (backwards) continued fractions `n₁ − 1/(n₂ − 1/(n₃ − ⋯))` and the
//! height function `τ = 2 log w`.

use crate::error::{Error, Result};
use crate::interval::{down, up, CertifiedInterval};
use crate::quadratic::{square_free_split, Quadratic};
use crate::shift::Symbol;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// `c = (3 + √5)/6`, the constant of the two-sided height bound.
pub fn height_constant() -> f64 {
    (3.0 + 5f64.sqrt()) / 6.0
}

/// Supremum of `1/(n₂ − 1/(n₃ − ⋯))` over digit sequences `≥ m`:
/// the fixed point `(m − √(m² − 4))/2` of `y ↦ 1/(m − y)`.
pub fn tail_sup(min_digit: Symbol) -> f64 {
    let m = min_digit as f64;
    if min_digit <= 2 {
        return 1.0;
    }
    // Written as 2/(m + √(m²−4)) to avoid cancellation.
    2.0 / (m + (m * m - 4.0).sqrt())
}

/// Exact `y_max` for digits `≥ 3`, i.e. `(3 − √5)/2`.
pub fn tail_sup_exact() -> Quadratic {
    Quadratic::new(
        BigRational::new(3.into(), 2.into()),
        BigRational::new((-1).into(), 2.into()),
        BigInt::from(5),
    )
    .expect("valid radicand")
}

/// How the digits beyond the supplied word are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailModel {
    /// The word is the whole expansion.
    Empty,
    /// Any continuation with digits `≥ 3`.
    WorstCase,
    /// The word repeats forever.
    PeriodicExtension,
}

/// One position of a cylinder pattern: a fixed digit or every digit `≥ from`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Digit {
    Sym(Symbol),
    Tail { from: Symbol },
}

impl Digit {
    pub fn lower(&self) -> Symbol {
        match *self {
            Digit::Sym(n) => n,
            Digit::Tail { from } => from,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CFValue {
    pub value: CertifiedInterval,
    pub exact: Option<Quadratic>,
    /// Set when the value is a terminating (rational) expansion.
    pub finite: bool,
}

/// Enclose `n₁ − 1/(n₂ − ⋯ − 1/(n_k − y))` for digit ranges and `y ∈ tail`.
///
/// The value is increasing in every digit and decreasing in `y`, so endpoints
/// come from endpoint digits; an unbounded digit range sends its partial value to ∞.
pub fn eval_pattern(digits: &[Digit], tail: CertifiedInterval) -> Result<CertifiedInterval> {
    let (mut lo, mut hi) = (tail.lower, tail.upper);
    for (pos, d) in digits.iter().enumerate().rev() {
        let (n_lo, n_hi) = match *d {
            Digit::Sym(n) => (n as f64, n as f64),
            Digit::Tail { from } => (from as f64, f64::INFINITY),
        };
        if n_lo < 2.0 {
            return Err(Error::Domain(format!("digit {n_lo} below 2")));
        }
        // Decreasing in the tail value, increasing in the digit.
        let v_lo = down(n_lo - hi);
        let v_hi = if n_hi.is_infinite() { f64::INFINITY } else { up(n_hi - lo) };
        if v_lo <= 0.0 {
            return Err(Error::Domain("backward evaluation hit a nonpositive remainder".into()));
        }
        if pos == 0 {
            lo = v_lo;
            hi = v_hi;
        } else {
            lo = down(1.0 / v_hi).max(0.0);
            hi = up(1.0 / v_lo);
        }
    }
    Ok(CertifiedInterval::new(lo, hi))
}

/// The interval of tail values `y` for a tail model over digits `≥ 3`.
pub fn worst_case_tail() -> CertifiedInterval {
    CertifiedInterval::new(0.0, up(tail_sup(3)))
}

/// Evaluate the minus continued fraction of `digits` under a tail model.
pub fn eval_minus_cf(digits: &[Symbol], tail: TailModel) -> Result<CFValue> {
    if digits.is_empty() {
        return Err(Error::Domain("empty digit word".into()));
    }
    let min = *digits.iter().min().expect("nonempty");
    if min < 2 {
        return Err(Error::Domain(format!("digit {min} below 2")));
    }
    match tail {
        TailModel::Empty => {
            let exact = eval_rational(digits);
            Ok(CFValue { value: exact.to_interval(), exact: Some(exact), finite: true })
        }
        TailModel::WorstCase => {
            if min < 3 {
                return Err(Error::Domain("worst-case tail requires digits >= 3".into()));
            }
            let pat: Vec<Digit> = digits.iter().map(|&n| Digit::Sym(n)).collect();
            Ok(CFValue { value: eval_pattern(&pat, worst_case_tail())?, exact: None, finite: false })
        }
        TailModel::PeriodicExtension => {
            let exact = periodic_value(digits)?;
            Ok(CFValue { value: exact.to_interval(), exact: Some(exact), finite: false })
        }
    }
}

fn eval_rational(digits: &[Symbol]) -> Quadratic {
    let mut v = BigRational::from_integer(BigInt::from(*digits.last().expect("nonempty")));
    for &n in digits[..digits.len() - 1].iter().rev() {
        v = BigRational::from_integer(BigInt::from(n)) - v.recip();
    }
    Quadratic::rational(v)
}

/// Product of the digit matrices `[[n, −1], [1, 0]]`.
pub fn block_matrix(digits: &[Symbol]) -> [BigInt; 4] {
    let (mut a, mut b, mut c, mut d) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    for &n in digits {
        let n = BigInt::from(n);
        let (na, nb) = (&a * &n + &b, -a.clone());
        let (nc, nd) = (&c * &n + &d, -c.clone());
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    [a, b, c, d]
}

/// The attracting fixed point `> 1` of a periodic block, exactly.
pub fn periodic_value(digits: &[Symbol]) -> Result<Quadratic> {
    if digits.is_empty() || digits.iter().any(|&n| n < 2) {
        return Err(Error::Domain("periodic block needs digits >= 2".into()));
    }
    let [a, _b, c, d] = block_matrix(digits);
    let tr: BigInt = &a + &d;
    if tr <= BigInt::from(2) {
        return Err(Error::Domain("parabolic block: the expansion tends to the cusp".into()));
    }
    // tr² − 4 = (tr − 2)(tr + 2); split each factor separately.
    let (s1, c1) = square_free_split(&(&tr - 2));
    let (s2, c2) = square_free_split(&(&tr + 2));
    let (s3, core) = square_free_split(&(&c1 * &c2));
    let s = s1 * s2 * s3;
    let two_c = BigRational::from_integer(&c * 2);
    let rational = BigRational::from_integer(&a - &d) / &two_c;
    let irr = BigRational::from_integer(s) / &two_c;
    Quadratic::new(rational, irr, core)
}

/// Enclosure of `τ = 2 log w` for a digit word.
pub fn tau(digits: &[Symbol], tail: TailModel) -> Result<CertifiedInterval> {
    let v = eval_minus_cf(digits, tail)?;
    Ok(v.value.ln().scale(2.0))
}

/// Enclosure of `τ` on the cylinder described by a digit pattern, tail `≥ 3`.
pub fn tau_pattern(digits: &[Digit]) -> Result<CertifiedInterval> {
    Ok(eval_pattern(digits, worst_case_tail())?.ln().scale(2.0))
}

/// Output of a continued-fraction expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub digits: Vec<Symbol>,
    /// The expansion terminated (the input was rational).
    pub finite: bool,
    /// A real input ran out of certified precision before `max_digits`.
    pub precision_exhausted: bool,
}

/// Expand an exact `w > 1`: `n = ⌈w⌉`, `w ← 1/(n − w)`.
///
/// A remainder that is an exact integer is emitted as the final digit.
pub fn expand_minus_cf(w: &Quadratic, max_digits: usize) -> Result<Expansion> {
    if w.cmp_int(1) != std::cmp::Ordering::Greater {
        return Err(Error::Domain(format!("expansion requires w > 1, got {w}")));
    }
    let mut x = w.clone();
    let mut digits = Vec::with_capacity(max_digits);
    while digits.len() < max_digits {
        if let Some(n) = x.as_integer() {
            digits.push(to_symbol(&n)?);
            return Ok(Expansion { digits, finite: true, precision_exhausted: false });
        }
        let n = x.ceil();
        digits.push(to_symbol(&n)?);
        let n_q = Quadratic::rational(BigRational::from_integer(n));
        x = n_q.sub(&x)?.recip()?;
    }
    Ok(Expansion { digits, finite: false, precision_exhausted: false })
}

fn to_symbol(n: &BigInt) -> Result<Symbol> {
    n.to_u64().ok_or_else(|| Error::Domain(format!("digit {n} out of range")))
}

/// Expand a real enclosure; stops once the digit is no longer determined.
pub fn expand_minus_cf_real(w: CertifiedInterval, max_digits: usize) -> Result<Expansion> {
    if w.lower <= 1.0 || !w.is_finite() {
        return Err(Error::Domain(format!("expansion requires finite w > 1, got {w}")));
    }
    let mut x = w;
    let mut digits = Vec::new();
    while digits.len() < max_digits {
        let (a, b) = (x.lower.ceil(), x.upper.ceil());
        if a != b || x.lower == a {
            // Undetermined digit, or an integer endpoint that might be the exact value.
            let finite = x.lower == x.upper && x.lower == a;
            if finite {
                digits.push(a as Symbol);
            }
            return Ok(Expansion { digits, finite, precision_exhausted: !finite });
        }
        digits.push(a as Symbol);
        let lo = down(1.0 / up(a - x.lower));
        let hi = up(1.0 / down(a - x.upper));
        if !(hi.is_finite() && lo > 1.0) {
            return Ok(Expansion { digits, finite: false, precision_exhausted: true });
        }
        x = CertifiedInterval::new(lo, hi);
    }
    Ok(Expansion { digits, finite: false, precision_exhausted: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        let w3 = eval_minus_cf(&[3], TailModel::PeriodicExtension).unwrap();
        assert!((w3.value.midpoint() - 2.618033988749895).abs() < 1e-14);
        let w4 = eval_minus_cf(&[4], TailModel::PeriodicExtension).unwrap();
        assert!((w4.value.midpoint() - 3.732050807568877).abs() < 1e-14);
        assert!(w4.value.contains(2.0 + 3f64.sqrt()));
    }

    #[test]
    fn tail_fixed_point_is_exact() {
        let y = tail_sup_exact();
        let rhs = Quadratic::integer(3).sub(&y).unwrap().recip().unwrap();
        assert_eq!(y, rhs);
        assert!((y.to_f64() - tail_sup(3)).abs() < 1e-16);
    }

    #[test]
    fn worst_case_single_digit() {
        for n in 3..20u64 {
            let v = eval_minus_cf(&[n], TailModel::WorstCase).unwrap().value;
            assert!(v.contains(n as f64));
            assert!(v.contains(n as f64 - tail_sup(3)));
            assert!(v.width() < 0.382);
        }
    }

    #[test]
    fn tau_values() {
        let t3 = tau(&[3], TailModel::PeriodicExtension).unwrap();
        assert!((t3.midpoint() - 1.924847300238413).abs() < 1e-12);
        let t4 = tau(&[4], TailModel::PeriodicExtension).unwrap();
        assert!((t4.midpoint() - 2.633915793849634).abs() < 1e-12);
    }

    #[test]
    fn expansions() {
        let g = periodic_value(&[3]).unwrap();
        assert_eq!(expand_minus_cf(&g, 5).unwrap().digits, vec![3; 5]);
        let h = periodic_value(&[4]).unwrap();
        assert_eq!(expand_minus_cf(&h, 4).unwrap().digits, vec![4; 4]);
        let five_halves = Quadratic::rational(BigRational::new(5.into(), 2.into()));
        let e = expand_minus_cf(&five_halves, 4).unwrap();
        assert_eq!(e.digits, vec![3, 2]);
        assert!(e.finite);
        assert!(expand_minus_cf(&Quadratic::integer(1), 3).is_err());
    }

    #[test]
    fn real_expansion_stops_honestly() {
        let w = CertifiedInterval::around(2.0 + 3f64.sqrt());
        let e = expand_minus_cf_real(w, 100).unwrap();
        assert!(e.digits.len() >= 10 && e.precision_exhausted);
        assert!(e.digits.iter().all(|&d| d == 4));
    }

    #[test]
    fn six_three_block() {
        let w = periodic_value(&[6, 3]).unwrap();
        let back = Quadratic::integer(6)
            .sub(&Quadratic::integer(3).sub(&w.recip().unwrap()).unwrap().recip().unwrap())
            .unwrap();
        assert_eq!(w, back);
        assert_eq!(w.cmp_int(1), std::cmp::Ordering::Greater);
    }
}
