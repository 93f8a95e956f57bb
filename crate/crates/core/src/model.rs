//! Domain types shared across the engine: system shapes, right-hand sides,
//! power-sum vectors and finite integer sets.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Tuple length `s`, degree `k` and box radius `X` of a Vinogradov system.
///
/// Variables range over `[-X, X]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    pub s: u32,
    pub k: u32,
    #[serde(rename = "X")]
    pub x: u64,
}

impl SystemShape {
    pub fn new(s: u32, k: u32, x: u64) -> Result<Self> {
        if s == 0 || k == 0 || x == 0 {
            return Err(Error::Invalid(format!(
                "shape requires s, k, X >= 1 (got s={s}, k={k}, X={x})"
            )));
        }
        Ok(SystemShape { s, k, x })
    }

    /// `k(k+1)/2`, the critical number of variables per side.
    pub fn critical_s(&self) -> u64 {
        critical_s(self.k)
    }

    pub fn is_subcritical(&self) -> bool {
        (self.s as u64) < self.critical_s()
    }

    /// Same `s` and `k` with a different box radius.
    pub fn with_radius(&self, x: u64) -> Result<Self> {
        SystemShape::new(self.s, self.k, x)
    }

    /// The box `[-X, X]` as an [`IntSet`].
    pub fn box_set(&self) -> IntSet {
        IntSet::interval(-(self.x as i64), self.x as i64)
    }
}

pub fn critical_s(k: u32) -> u64 {
    let k = k as u64;
    k * (k + 1) / 2
}

/// Target vector `a` of an inhomogeneous system together with `ℓ`, the
/// 1-based index of its first nonzero entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct RhsVector {
    a: Vec<i64>,
    ell: Option<u32>,
}

impl RhsVector {
    pub fn new(a: Vec<i64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Invalid("right-hand side must have k >= 1 entries".into()));
        }
        let ell = first_nonzero_index(&a);
        Ok(RhsVector { a, ell })
    }

    pub fn zero(k: u32) -> Self {
        RhsVector {
            a: vec![0; k as usize],
            ell: None,
        }
    }

    pub fn k(&self) -> u32 {
        self.a.len() as u32
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.a
    }

    pub fn ell(&self) -> Option<u32> {
        self.ell
    }

    pub fn is_zero(&self) -> bool {
        self.ell.is_none()
    }

    pub fn negated(&self) -> Self {
        RhsVector {
            a: self.a.iter().map(|v| -v).collect(),
            ell: self.ell,
        }
    }

    pub fn to_power_sum(&self) -> PowerSumVector {
        PowerSumVector::from_slice(&self.a)
    }

    pub(crate) fn check_degree(&self, k: u32) -> Result<()> {
        if self.k() != k {
            return Err(Error::Invalid(format!(
                "right-hand side has {} entries but k = {k}",
                self.k()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<i64>> for RhsVector {
    type Error = Error;

    fn try_from(a: Vec<i64>) -> Result<Self> {
        RhsVector::new(a)
    }
}

impl From<RhsVector> for Vec<i64> {
    fn from(r: RhsVector) -> Self {
        r.a
    }
}

impl fmt::Display for RhsVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for RhsVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RhsVector::new(parse_int_list(s)?)
    }
}

/// Least `ℓ` (1-based) with `a_ℓ != 0`, or `None` for the zero vector.
pub fn first_nonzero_index(a: &[i64]) -> Option<u32> {
    a.iter().position(|&v| v != 0).map(|i| i as u32 + 1)
}

/// `(Σx_i, Σx_i², …, Σx_i^k)` for some integer tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerSumVector(SmallVec<[i64; 4]>);

impl PowerSumVector {
    pub fn zero(k: u32) -> Self {
        PowerSumVector(SmallVec::from_elem(0, k as usize))
    }

    pub fn from_slice(v: &[i64]) -> Self {
        PowerSumVector(SmallVec::from_slice(v))
    }

    pub fn k(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.0.len(), other.0.len());
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_add(*b)?);
        }
        Some(PowerSumVector(out))
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.0.len(), other.0.len());
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(PowerSumVector(out))
    }

    /// `(v_1, v_2, v_3, …) ↦ (-v_1, v_2, -v_3, …)`, the image under `x ↦ -x`.
    pub fn reflect(&self) -> Self {
        PowerSumVector(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &v)| if i % 2 == 0 { -v } else { v })
                .collect(),
        )
    }
}

impl Add for &PowerSumVector {
    type Output = PowerSumVector;

    fn add(self, rhs: &PowerSumVector) -> PowerSumVector {
        self.checked_add(rhs).expect("power-sum coordinate overflow")
    }
}

impl Sub for &PowerSumVector {
    type Output = PowerSumVector;

    fn sub(self, rhs: &PowerSumVector) -> PowerSumVector {
        self.checked_sub(rhs).expect("power-sum coordinate overflow")
    }
}

impl Neg for &PowerSumVector {
    type Output = PowerSumVector;

    fn neg(self) -> PowerSumVector {
        PowerSumVector(self.0.iter().map(|v| -v).collect())
    }
}

/// Power sums of `x` up to degree `k`, or `None` on `i64` overflow.
pub fn checked_power_sum_vector(x: &[i64], k: u32) -> Option<PowerSumVector> {
    let mut out: SmallVec<[i64; 4]> = SmallVec::from_elem(0, k as usize);
    for &xi in x {
        let mut p: i64 = 1;
        for slot in out.iter_mut() {
            p = p.checked_mul(xi)?;
            *slot = slot.checked_add(p)?;
        }
    }
    Some(PowerSumVector(out))
}

/// Power sums of `x` up to degree `k`.
///
/// Panics if a coordinate overflows `i64`; use [`checked_power_sum_vector`]
/// for untrusted input.
pub fn power_sum_vector(x: &[i64], k: u32) -> PowerSumVector {
    checked_power_sum_vector(x, k).expect("power-sum coordinate overflow")
}

/// A finite set of integers, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntSet(Vec<i64>);

impl From<Vec<i64>> for IntSet {
    fn from(v: Vec<i64>) -> Self {
        IntSet::new(v)
    }
}

impl From<IntSet> for Vec<i64> {
    fn from(s: IntSet) -> Self {
        s.0
    }
}

impl IntSet {
    pub fn new(mut elements: Vec<i64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        IntSet(elements)
    }

    /// `[lo, hi] ∩ ℤ`; empty when `lo > hi`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        if lo > hi {
            return IntSet(Vec::new());
        }
        IntSet((lo..=hi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn min(&self) -> Option<i64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.0.last().copied()
    }

    /// `max(|min|, |max|)`, or 0 for the empty set.
    pub fn max_abs(&self) -> u64 {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => lo.unsigned_abs().max(hi.unsigned_abs()),
            _ => 0,
        }
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    /// True when the set is exactly `[lo, hi] ∩ ℤ` for some `lo <= hi`.
    pub fn is_interval(&self) -> bool {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => (hi - lo) as usize + 1 == self.0.len(),
            _ => false,
        }
    }
}

impl FromIterator<i64> for IntSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        IntSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_interval() && self.len() > 2 {
            return write!(f, "[{}..{}]", self.0[0], self.0[self.0.len() - 1]);
        }
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Accepts `[lo..hi]` intervals and `{a,b,c}` explicit lists.
impl FromStr for IntSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (lo, hi) = inner
                .split_once("..")
                .ok_or_else(|| Error::Parse(format!("interval needs `lo..hi`: {s:?}")))?;
            let lo = parse_int(lo)?;
            let hi = parse_int(hi)?;
            if lo > hi {
                return Err(Error::Parse(format!("empty interval {s:?}")));
            }
            return Ok(IntSet::interval(lo, hi));
        }
        if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            if inner.trim().is_empty() {
                return Ok(IntSet::new(Vec::new()));
            }
            return Ok(IntSet::new(parse_int_list(inner)?));
        }
        Err(Error::Parse(format!(
            "set must look like [lo..hi] or {{a,b,c}}: {s:?}"
        )))
    }
}

/// `{x + h : x ∈ a, h ∈ b}`.
pub fn sumset(a: &IntSet, b: &IntSet) -> IntSet {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a.iter() {
        for h in b.iter() {
            out.push(x + h);
        }
    }
    IntSet::new(out)
}

fn parse_int(s: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Parses `1,-2,3` (whitespace tolerated).
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',').map(parse_int).collect()
}
