//! Closed real enclosures with outward rounding.
//!
//! Every arithmetic result is rounded outward. For `+ - * /` the rounding
//! error is recovered exactly (two-sum, fma residuals) so an endpoint only
//! moves when the floating-point result was actually inexact. Results of
//! library transcendentals (`ln`, `powf`, `cos`, ...) are widened by
//! [`LIBM_ULPS`] units in the last place.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Widening applied to results of library transcendental functions.
pub const LIBM_ULPS: u32 = 4;

/// Below this magnitude fma residuals may lose exactness (gradual underflow).
const TINY: f64 = f64::MIN_POSITIVE * 9007199254740992.0;

/// A closed interval `[lo, hi]` guaranteed to contain a real quantity.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

pub fn step_down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

pub fn step_up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn mul_dir(a: f64, b: f64, up: bool) -> f64 {
    let p = a * b;
    if !p.is_finite() || a == 0.0 || b == 0.0 {
        return p;
    }
    if p.abs() < TINY {
        return if up { step_up(p, 2) } else { step_down(p, 2) };
    }
    let e = a.mul_add(b, -p);
    match (up, e > 0.0, e < 0.0) {
        (true, true, _) => p.next_up(),
        (false, _, true) => p.next_down(),
        _ => p,
    }
}

#[inline]
fn div_dir(a: f64, b: f64, up: bool) -> f64 {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return q;
    }
    if q.abs() < TINY || a.abs() < TINY {
        return if up { step_up(q, 2) } else { step_down(q, 2) };
    }
    // a = q*b + r exactly; the true quotient is q + r/b.
    let r = (-q).mul_add(b, a);
    let excess = if b > 0.0 { r } else { -r };
    match (up, excess > 0.0, excess < 0.0) {
        (true, true, _) => q.next_up(),
        (false, _, true) => q.next_down(),
        _ => q,
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    /// Builds `[lo, hi]`. Panics if the bounds are NaN or reversed.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    /// Encloses a value produced by a library function with ≤ `ulps` error.
    pub fn around(x: f64, ulps: u32) -> Self {
        Interval::new(step_down(x, ulps), step_up(x, ulps))
    }

    /// Encloses `x ± abs_err`, rounded outward.
    pub fn with_abs_error(x: f64, abs_err: f64) -> Self {
        Interval::new(add_down(x, -abs_err), add_up(x, abs_err))
    }

    /// Exact conversion of an integer; widened when it exceeds 2^53.
    pub fn from_u64(n: u64) -> Self {
        let x = n as f64;
        if x as u64 == n && n <= (1u64 << 53) {
            Interval::point(x)
        } else {
            Interval::around(x, 1)
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Widens both endpoints outward by `ulps` units in the last place.
    pub fn widen(&self, ulps: u32) -> Interval {
        Interval::new(step_down(self.lo, ulps), step_up(self.hi, ulps))
    }

    /// Widens by an absolute amount.
    pub fn inflate(&self, abs: f64) -> Interval {
        Interval::new(add_down(self.lo, -abs), add_up(self.hi, abs))
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Interval {
        let l = self.lo.clamp(lo, hi);
        let h = self.hi.clamp(lo, hi);
        Interval::new(l, h)
    }

    pub fn clamp01(&self) -> Interval {
        self.clamp(0.0, 1.0)
    }

    /// Drops any negative part of an enclosure of a nonnegative quantity.
    pub fn nonneg(&self) -> Interval {
        Interval::new(self.lo.max(0.0), self.hi.max(0.0))
    }

    /// Certainly `self < other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    /// Certainly `self <= other`.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn mul_f64(&self, c: f64) -> Interval {
        *self * Interval::point(c)
    }

    pub fn recip(&self) -> Interval {
        Interval::ONE / *self
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut n: u64) -> Interval {
        let mut base = *self;
        let mut acc = Interval::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Natural logarithm of a positive interval.
    pub fn ln(&self) -> Interval {
        debug_assert!(self.lo > 0.0);
        Interval::new(
            step_down(self.lo.ln(), LIBM_ULPS),
            step_up(self.hi.ln(), LIBM_ULPS),
        )
    }

    /// `x^p` for a positive interval and real exponent.
    pub fn powf(&self, p: f64) -> Interval {
        debug_assert!(self.lo > 0.0);
        let a = self.lo.powf(p);
        let b = self.hi.powf(p);
        Interval::new(
            step_down(a.min(b), LIBM_ULPS),
            step_up(a.max(b), LIBM_ULPS),
        )
    }

    pub fn sqrt(&self) -> Interval {
        Interval::new(
            step_down(self.lo.max(0.0).sqrt(), 1),
            step_up(self.hi.sqrt(), 1),
        )
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -o.hi),
            hi: add_up(self.hi, -o.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        if self.lo >= 0.0 && o.lo >= 0.0 {
            return Interval {
                lo: mul_dir(self.lo, o.lo, false),
                hi: mul_dir(self.hi, o.hi, true),
            };
        }
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| mul_dir(a, b, false))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| mul_dir(a, b, true))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Division by an interval containing zero yields `[-inf, inf]`.
    fn div(self, o: Interval) -> Interval {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            if self.is_point() && self.lo == 0.0 && !(o.lo == 0.0 && o.hi == 0.0) {
                return Interval::ZERO;
            }
            return Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            };
        }
        if self.lo >= 0.0 && o.lo > 0.0 {
            return Interval {
                lo: div_dir(self.lo, o.hi, false),
                hi: div_dir(self.hi, o.lo, true),
            };
        }
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| div_dir(a, b, false))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| div_dir(a, b, true))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Closed integer range `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerInterval {
    pub lo: u64,
    pub hi: u64,
}

impl IntegerInterval {
    pub fn new(lo: u64, hi: u64) -> Self {
        assert!(lo <= hi, "invalid integer interval [{lo}, {hi}]");
        IntegerInterval { lo, hi }
    }

    pub fn exact(v: u64) -> Self {
        IntegerInterval { lo: v, hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for IntegerInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;
    use std::cmp::Ordering;

    /// Exact comparison of a positive finite `x` against `num/den`.
    fn cmp_rational(x: f64, num: u128, den: u128) -> Ordering {
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as u128;
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
        // x = mant * 2^e
        if e >= 0 {
            (mant * den << e).cmp(&num)
        } else {
            (mant * den).cmp(&(num << (-e)))
        }
    }

    proptest! {
        #[test]
        fn sum_and_product_enclose_exact_rationals(a in 1u64..50_000, b in 1u64..50_000, c in 1u64..50_000) {
            let x = Interval::point(a as f64) / Interval::point(b as f64);
            let y = Interval::ONE / Interval::point(c as f64);
            let (num, den) = ((a * c + b) as u128, (b * c) as u128);
            let s = x + y;
            prop_assert_ne!(cmp_rational(s.lo(), num, den), Ordering::Greater);
            prop_assert_ne!(cmp_rational(s.hi(), num, den), Ordering::Less);
            let p = x * y;
            prop_assert_ne!(cmp_rational(p.lo(), a as u128, den), Ordering::Greater);
            prop_assert_ne!(cmp_rational(p.hi(), a as u128, den), Ordering::Less);
            let d = x - y;
            if a * c > b {
                let dn = (a * c - b) as u128;
                prop_assert_ne!(cmp_rational(d.lo().max(f64::MIN_POSITIVE), dn, den), Ordering::Greater);
                prop_assert_ne!(cmp_rational(d.hi(), dn, den), Ordering::Less);
            }
        }
    }
}
