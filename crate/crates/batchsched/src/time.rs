//! Exact rational time arithmetic.
//!
//! Every duration and timestamp in the crate is a [`TimeValue`]: a
//! nonnegative rational kept in lowest terms. There is no floating point
//! and no epsilon anywhere; equality and ordering are exact. Values
//! serialize as integers when integral and as `"num/den"` strings
//! otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Nonnegative rational time, always in lowest terms.
///
/// The inner representation keeps numerator and denominator reduced with a
/// positive denominator; the constructors reject negative values so the
/// nonnegativity invariant holds by construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TimeValue(BigRational);

impl TimeValue {
    pub fn zero() -> Self {
        TimeValue(BigRational::zero())
    }

    pub fn one() -> Self {
        TimeValue(BigRational::one())
    }

    pub fn from_integer(n: u64) -> Self {
        TimeValue(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den`. Errors on a zero denominator.
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(TimeValue(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    /// Wraps an arbitrary rational, rejecting negatives.
    pub fn from_rational(r: BigRational) -> Result<Self, Error> {
        if r.is_negative() {
            return Err(Error::NegativeTime(r.to_string()));
        }
        Ok(TimeValue(r))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `self - other`; subtraction below zero is a domain error.
    pub fn checked_sub(&self, other: &TimeValue) -> Result<TimeValue, Error> {
        if self.0 < other.0 {
            return Err(Error::NegativeTime(format!("{self} - {other}")));
        }
        Ok(TimeValue(&self.0 - &other.0))
    }

    /// Division by a positive integer.
    pub fn div_int(&self, k: u64) -> Result<TimeValue, Error> {
        if k == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(TimeValue(&self.0 / BigRational::from_integer(BigInt::from(k))))
    }

    /// Exact ratio `self / other`, `None` when `other` is zero.
    pub fn checked_div(&self, other: &TimeValue) -> Option<TimeValue> {
        if other.is_zero() {
            return None;
        }
        Some(TimeValue(&self.0 / &other.0))
    }

    pub fn min(self, other: TimeValue) -> TimeValue {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: TimeValue) -> TimeValue {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Sum of an iterator of borrowed values.
    pub fn sum_of<'a>(values: impl IntoIterator<Item = &'a TimeValue>) -> TimeValue {
        let mut acc = BigRational::zero();
        for v in values {
            acc += &v.0;
        }
        TimeValue(acc)
    }

    /// Lossy float view, for presentation (plots) only.
    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl PartialOrd for TimeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Add for TimeValue {
    type Output = TimeValue;
    fn add(self, rhs: TimeValue) -> TimeValue {
        TimeValue(self.0 + rhs.0)
    }
}

impl Add<&TimeValue> for &TimeValue {
    type Output = TimeValue;
    fn add(self, rhs: &TimeValue) -> TimeValue {
        TimeValue(&self.0 + &rhs.0)
    }
}

impl AddAssign<&TimeValue> for TimeValue {
    fn add_assign(&mut self, rhs: &TimeValue) {
        self.0 += &rhs.0;
    }
}

impl Mul<&TimeValue> for &TimeValue {
    type Output = TimeValue;
    fn mul(self, rhs: &TimeValue) -> TimeValue {
        TimeValue(&self.0 * &rhs.0)
    }
}

impl Sum for TimeValue {
    fn sum<I: Iterator<Item = TimeValue>>(iter: I) -> TimeValue {
        let mut acc = BigRational::zero();
        for v in iter {
            acc += v.0;
        }
        TimeValue(acc)
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeValue({self})")
    }
}

impl FromStr for TimeValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse_int = |part: &str| -> Result<BigInt, Error> {
            part.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("bad rational component `{part}`")))
        };
        let r = match s.split_once('/') {
            Some((num, den)) => {
                let den = parse_int(den)?;
                if den.is_zero() {
                    return Err(Error::ZeroDenominator);
                }
                BigRational::new(parse_int(num)?, den)
            }
            None => BigRational::from_integer(parse_int(s)?),
        };
        TimeValue::from_rational(r)
    }
}

impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(n) = self.0.numer().to_u64() {
                return serializer.serialize_u64(n);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

struct TimeValueVisitor;

impl Visitor<'_> for TimeValueVisitor {
    type Value = TimeValue;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a nonnegative integer or a \"num/den\" string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<TimeValue, E> {
        Ok(TimeValue::from_integer(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<TimeValue, E> {
        u64::try_from(v)
            .map(TimeValue::from_integer)
            .map_err(|_| E::custom("time values must be nonnegative"))
    }

    fn visit_f64<E: de::Error>(self, _: f64) -> Result<TimeValue, E> {
        Err(E::custom("time values are exact rationals; write \"num/den\", not a float"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<TimeValue, E> {
        v.parse().map_err(|e: Error| E::custom(e.to_string()))
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(TimeValueVisitor)
    }
}

/// Largest integer `s` with `s * s <= x`.
pub fn isqrt(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut s = (x as f64).sqrt() as u64;
    while s.saturating_mul(s) > x {
        s -= 1;
    }
    while (s + 1).saturating_mul(s + 1) <= x {
        s += 1;
    }
    s
}

/// Smallest integer `s >= 0` with `s^2 * den >= num`, i.e. the ceiling of
/// the square root of `num/den`, computed without rounding.
pub fn ceil_sqrt_ratio(num: u64, den: u64) -> u64 {
    assert!(den > 0, "denominator must be positive");
    if num == 0 {
        return 0;
    }
    let mut s = isqrt(num / den);
    while (s as u128) * (s as u128) * (den as u128) < num as u128 {
        s += 1;
    }
    s
}

/// Smallest `q >= 1` with `q^q >= x`. For `x >= 2` this is the unique `q`
/// with `q^q >= x > (q-1)^(q-1)`.
pub fn min_self_power_at_least(x: u64) -> u64 {
    let mut q: u64 = 1;
    loop {
        let mut pow: u128 = 1;
        for _ in 0..q {
            pow = pow.saturating_mul(q as u128);
        }
        if pow >= x as u128 {
            return q;
        }
        q += 1;
    }
}
