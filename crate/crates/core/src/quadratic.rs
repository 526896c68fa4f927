//! Exact arithmetic in real quadratic fields ℚ(√d).

use crate::error::{Error, Result};
use crate::interval::CertifiedInterval;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `a + b√d` with rational `a, b` and square-free `d ≥ 2`.
///
/// Rationals are stored with `b = 0`; their `d` only records the field they
/// were produced in and is ignored by comparisons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadratic {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigInt,
}

fn ratio(n: i64, m: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(m))
}

impl Quadratic {
    /// Build `a + b√d`; `d` is reduced to its square-free part.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Result<Self> {
        if d.sign() != Sign::Plus {
            return Err(Error::Domain(format!("radicand must be positive, got {d}")));
        }
        let (s, core) = square_free_split(&d);
        if core.is_one() {
            return Ok(Quadratic {
                a: a + b * BigRational::from_integer(s),
                b: BigRational::zero(),
                d: BigInt::one(),
            });
        }
        Ok(Quadratic { a, b: b * BigRational::from_integer(s), d: core })
    }

    pub fn rational(a: BigRational) -> Self {
        Quadratic { a, b: BigRational::zero(), d: BigInt::one() }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The integer value, if this is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        (self.is_rational() && self.a.is_integer()).then(|| self.a.to_integer())
    }

    fn field(&self, other: &Self) -> Result<BigInt> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => Err(Error::Domain(format!(
                "mixed quadratic fields Q(sqrt {}) and Q(sqrt {})",
                self.d, other.d
            ))),
        }
    }

    fn normalized(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() {
            Quadratic { a, b, d: BigInt::one() }
        } else {
            Quadratic { a, b, d }
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let d = self.field(o)?;
        Ok(Self::normalized(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let d = self.field(o)?;
        Ok(Self::normalized(&self.a - &o.a, &self.b - &o.b, d))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let d = self.field(o)?;
        let dr = BigRational::from_integer(d.clone());
        let a = &self.a * &o.a + &self.b * &o.b * dr;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Self::normalized(a, b, d))
    }

    pub fn neg(&self) -> Self {
        Quadratic { a: -self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    /// Galois conjugate `a − b√d`.
    pub fn conj(&self) -> Self {
        Quadratic { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    /// Field norm `a² − b²d`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone())
    }

    pub fn recip(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Self::normalized(&self.a / &n, -(&self.b / &n), self.d.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.recip()?)
    }

    pub fn add_int(&self, k: i64) -> Self {
        Quadratic {
            a: &self.a + BigRational::from_integer(BigInt::from(k)),
            b: self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with b²d.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_exact(&self, o: &Self) -> Result<Ordering> {
        Ok(self.sub(o)?.signum())
    }

    pub fn cmp_int(&self, k: i64) -> Ordering {
        self.add_int(-k).signum()
    }

    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        // b√d = sign(b)·√(b²d); floor of √ of a rational via integer roots.
        let r = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        let scale = r.denom().clone();
        let num = r.numer() * &scale;
        let root = num.sqrt();
        let root_r = BigRational::new(root, scale);
        let approx = if self.b.is_positive() { &self.a + root_r } else { &self.a - root_r };
        let mut n = approx.floor().to_integer();
        loop {
            let t = self.sub(&Quadratic::rational(BigRational::from_integer(n.clone())))
                .expect("same field");
            match t.signum() {
                Ordering::Less => n -= 1,
                _ => {
                    let t1 = t.add_int(-1);
                    if t1.signum() != Ordering::Less {
                        n += 1;
                    } else {
                        return n;
                    }
                }
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Nearest double, computed to avoid cancellation between `a` and `b√d`.
    pub fn to_f64(&self) -> f64 {
        let a = rat_to_f64(&self.a);
        if self.is_rational() {
            return a;
        }
        let bs = rat_to_f64(&self.b) * self.d.to_f64().unwrap_or(f64::INFINITY).sqrt();
        if (a >= 0.0) == (bs >= 0.0) {
            a + bs
        } else {
            rat_to_f64(&self.norm()) / (a - bs)
        }
    }

    /// A certified enclosure of the value.
    pub fn to_interval(&self) -> CertifiedInterval {
        let x = self.to_f64();
        if self.is_rational() && self.a == float_to_rat(x) {
            return CertifiedInterval::point(x);
        }
        CertifiedInterval::around(x).inflate(1e-15)
    }

    /// Apply the integer Möbius map `z ↦ (p z + q)/(r z + s)`.
    pub fn mobius(&self, p: i64, q: i64, r: i64, s: i64) -> Result<Self> {
        let num = self.mul(&Self::integer(p))?.add_int(q);
        let den = self.mul(&Self::integer(r))?.add_int(s);
        num.div(&den)
    }

    pub fn half() -> Self {
        Self::rational(ratio(1, 2))
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge numerators and denominators together.
            let nb = r.numer().bits() as i64;
            let db = r.denom().bits() as i64;
            let shift = (nb.max(db) - 1000).max(0) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

fn float_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Write `n = s²·core` with `core` square-free.
pub fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut m = n.abs();
    let mut s = BigInt::one();
    let mut core = BigInt::one();
    if m.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let limit = m.cbrt() + 1u32;
    let mut p = BigInt::from(2u32);
    while p <= limit && !m.is_one() {
        let mut e = 0u32;
        loop {
            let (q, r) = m.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            core *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    // Remaining cofactor has at most two prime factors, both above the cube root.
    let r = m.sqrt();
    if &r * &r == m {
        s *= r;
    } else {
        core *= m;
    }
    (s, core)
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}
