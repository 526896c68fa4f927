//! Closed real intervals with outward slop.
//!
//! Endpoints are doubles. Every operation that rounds widens its result by a
//! relative slop (default 2⁻⁴⁵) plus a tiny absolute term, so an enclosure
//! built from enclosures stays an enclosure at desk-scale precision.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Default relative inflation applied after rounded operations.
pub const DEFAULT_SLOP: f64 = 1.0 / 35_184_372_088_832.0; // 2^-45

const ABS_FLOOR: f64 = 1e-300;

/// Widen `x` downward by the default slop.
#[inline]
pub fn down(x: f64) -> f64 {
    if x.is_infinite() {
        return x;
    }
    x - x.abs() * DEFAULT_SLOP - ABS_FLOOR
}

/// Widen `x` upward by the default slop.
#[inline]
pub fn up(x: f64) -> f64 {
    if x.is_infinite() {
        return x;
    }
    x + x.abs() * DEFAULT_SLOP + ABS_FLOOR
}

/// A pair `lower ≤ upper` enclosing some real quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedInterval {
    pub lower: f64,
    pub upper: f64,
}

impl CertifiedInterval {
    /// Build from endpoints; panics on NaN or reversed endpoints.
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(
            !lower.is_nan() && !upper.is_nan() && lower <= upper,
            "invalid interval [{lower}, {upper}]"
        );
        CertifiedInterval { lower, upper }
    }

    /// Fallible constructor for untrusted endpoints.
    pub fn try_new(lower: f64, upper: f64) -> Option<Self> {
        (!lower.is_nan() && !upper.is_nan() && lower <= upper)
            .then_some(CertifiedInterval { lower, upper })
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// A point value widened by the default slop.
    pub fn around(x: f64) -> Self {
        Self::new(down(x), up(x))
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        if self.upper.is_infinite() || self.lower.is_infinite() {
            return if self.upper.is_infinite() && self.lower.is_infinite() {
                0.0
            } else if self.upper.is_infinite() {
                self.upper
            } else {
                self.lower
            };
        }
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::new(self.lower.min(other.lower), self.upper.max(other.upper))
    }

    /// Relative outward inflation by `eps` (plus an absolute floor).
    pub fn inflate(&self, eps: f64) -> Self {
        let lo = if self.lower.is_finite() {
            self.lower - self.lower.abs() * eps - ABS_FLOOR
        } else {
            self.lower
        };
        let hi = if self.upper.is_finite() {
            self.upper + self.upper.abs() * eps + ABS_FLOOR
        } else {
            self.upper
        };
        Self::new(lo, hi)
    }

    /// Multiply by a scalar (sign-aware), inflating outward.
    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::point(0.0);
        }
        let (a, b) = (self.lower * c, self.upper * c);
        let (lo, hi) = if c > 0.0 { (a, b) } else { (b, a) };
        Self::new(down(lo), up(hi))
    }

    pub fn exp(&self) -> Self {
        Self::new(down(self.lower.exp()).max(0.0), up(self.upper.exp()))
    }

    /// Natural log; the interval must be nonnegative.
    pub fn ln(&self) -> Self {
        assert!(self.lower >= 0.0, "log of interval with negative part");
        Self::new(down(self.lower.ln()), up(self.upper.ln()))
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}

impl Add for CertifiedInterval {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(down(self.lower + rhs.lower), up(self.upper + rhs.upper))
    }
}

impl Sub for CertifiedInterval {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(down(self.lower - rhs.upper), up(self.upper - rhs.lower))
    }
}

impl Neg for CertifiedInterval {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.upper, -self.lower)
    }
}

impl fmt::Display for CertifiedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}
