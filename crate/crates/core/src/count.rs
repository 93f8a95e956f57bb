//! Exact nonnegative solution counts.
//!
//! [`Count`] keeps values in a `u128` while they fit and moves to a
//! [`BigUint`] on the first checked overflow. The representation is
//! canonical (a big value is never below `u128::MAX`), so derived equality
//! and hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Small(u128),
    Big(BigUint),
}

/// Unbounded nonnegative integer used for every solution count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Count(Repr);

impl Count {
    pub const ZERO: Count = Count(Repr::Small(0));
    pub const ONE: Count = Count(Repr::Small(1));

    pub fn from_biguint(value: BigUint) -> Self {
        match value.to_u128() {
            Some(v) => Count(Repr::Small(v)),
            None => Count(Repr::Big(value)),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    /// The value as `u128`, if it fits.
    pub fn to_u128(&self) -> Option<u128> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    /// Nearest `f64` (saturates to infinity only beyond `f64::MAX`).
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => *v as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// Natural logarithm, accurate for values far beyond `f64` range.
    pub fn ln(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => (*v as f64).ln(),
            Repr::Big(b) => {
                let bits = b.bits();
                let shift = bits.saturating_sub(64);
                let top = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
                top.ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }

    pub fn pow(&self, exp: u32) -> Count {
        let mut acc = Count::ONE;
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }
}

impl Default for Count {
    fn default() -> Self {
        Count::ZERO
    }
}

impl From<u128> for Count {
    fn from(v: u128) -> Self {
        Count(Repr::Small(v))
    }
}

impl From<u64> for Count {
    fn from(v: u64) -> Self {
        Count(Repr::Small(v as u128))
    }
}

impl From<usize> for Count {
    fn from(v: usize) -> Self {
        Count(Repr::Small(v as u128))
    }
}

impl From<u32> for Count {
    fn from(v: u32) -> Self {
        Count(Repr::Small(v as u128))
    }
}

impl From<BigUint> for Count {
    fn from(v: BigUint) -> Self {
        Count::from_biguint(v)
    }
}

impl Add<&Count> for &Count {
    type Output = Count;

    fn add(self, rhs: &Count) -> Count {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => match a.checked_add(*b) {
                Some(v) => Count(Repr::Small(v)),
                None => Count(Repr::Big(BigUint::from(*a) + *b)),
            },
            _ => Count::from_biguint(self.to_biguint() + rhs.to_biguint()),
        }
    }
}

impl Add for Count {
    type Output = Count;

    fn add(self, rhs: Count) -> Count {
        &self + &rhs
    }
}

impl AddAssign<&Count> for Count {
    fn add_assign(&mut self, rhs: &Count) {
        if let (Repr::Small(a), Repr::Small(b)) = (&mut self.0, &rhs.0) {
            if let Some(v) = a.checked_add(*b) {
                *a = v;
                return;
            }
        }
        *self = &*self + rhs;
    }
}

impl AddAssign for Count {
    fn add_assign(&mut self, rhs: Count) {
        *self += &rhs;
    }
}

impl Mul<&Count> for &Count {
    type Output = Count;

    fn mul(self, rhs: &Count) -> Count {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => match a.checked_mul(*b) {
                Some(v) => Count(Repr::Small(v)),
                None => Count(Repr::Big(BigUint::from(*a) * *b)),
            },
            _ => Count::from_biguint(self.to_biguint() * rhs.to_biguint()),
        }
    }
}

impl Mul for Count {
    type Output = Count;

    fn mul(self, rhs: Count) -> Count {
        &self * &rhs
    }
}

impl Sum for Count {
    fn sum<I: Iterator<Item = Count>>(iter: I) -> Count {
        let mut acc = Count::ZERO;
        for c in iter {
            acc += &c;
        }
        acc
    }
}

impl<'a> Sum<&'a Count> for Count {
    fn sum<I: Iterator<Item = &'a Count>>(iter: I) -> Count {
        let mut acc = Count::ZERO;
        for c in iter {
            acc += c;
        }
        acc
    }
}

impl PartialOrd for Count {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Count {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(_)) => Ordering::Less,
            (Repr::Big(_), Repr::Small(_)) => Ordering::Greater,
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Count {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("not a decimal count: {s:?}")));
        }
        BigUint::from_str(s)
            .map(Count::from_biguint)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

// Counts travel as decimal strings so that consumers never truncate them.
impl Serialize for Count {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Zero for Count {
    fn zero() -> Self {
        Count::ZERO
    }

    fn is_zero(&self) -> bool {
        Count::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escalates_on_overflow() {
        let max = Count::from(u128::MAX);
        let sum = &max + &Count::ONE;
        assert!(sum.to_u128().is_none());
        assert_eq!(sum.to_biguint(), BigUint::from(u128::MAX) + 1u32);

        let prod = &max * &Count::from(3u32);
        assert_eq!(prod.to_biguint(), BigUint::from(u128::MAX) * 3u32);
    }

    #[test]
    fn big_values_demote_when_they_fit() {
        let c = Count::from_biguint(BigUint::from(17u32));
        assert_eq!(c, Count::from(17u32));
    }

    #[test]
    fn add_assign_escalates() {
        let mut c = Count::from(u128::MAX - 1);
        c += &Count::from(5u32);
        assert_eq!(c.to_string(), (BigUint::from(u128::MAX) + 4u32).to_string());
    }

    #[test]
    fn ordering_across_representations() {
        let small = Count::from(u128::MAX);
        let big = &small + &Count::ONE;
        assert!(small < big);
        assert!(Count::ZERO < small);
    }

    #[test]
    fn decimal_string_round_trip() {
        let big = Count::from(u128::MAX).pow(3);
        let text = big.to_string();
        assert_eq!(text.parse::<Count>().unwrap(), big);
        assert!("-1".parse::<Count>().is_err());
        assert!("".parse::<Count>().is_err());
        let json = serde_json::to_string(&big).unwrap();
        assert_eq!(json, format!("\"{text}\""));
    }

    #[test]
    fn ln_of_huge_value() {
        let big = Count::from(2u32).pow(300);
        assert!((big.ln() - 300.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
