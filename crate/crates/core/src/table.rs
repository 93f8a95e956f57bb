//! Sparse representation tables.
//!
//! A table of tuple length `t` over a digit set `D` maps each power-sum
//! vector `v` to `r_t(v) = #{x ∈ D^t : power_sum_vector(x) = v}`, or to the
//! total weight `Σ Π w(x_i)` when digits carry weights. Every solution count
//! in this crate is a correlation of such tables.

use std::fmt::Debug;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::count::Count;
use crate::error::{Error, Result};
use crate::model::{checked_power_sum_vector, IntSet, PowerSumVector};

/// Multiplicity type stored in a table.
///
/// [`Count`] is exact. `f64` carries nonnegative real weights; each
/// accumulation is a single rounded add or multiply of nonnegative values,
/// so the relative error per step is at most `2^-53`.
pub trait Weight: Clone + PartialEq + Debug + Send + Sync + 'static {
    const MODE: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn accumulate(&mut self, other: &Self);
    fn product(&self, other: &Self) -> Self;
    fn is_valid_weight(&self) -> bool;
    fn to_decimal(&self) -> String;
    fn parse_decimal(s: &str) -> Result<Self>;
}

impl Weight for Count {
    const MODE: &'static str = "integer";

    fn zero() -> Self {
        Count::ZERO
    }

    fn one() -> Self {
        Count::ONE
    }

    fn is_zero(&self) -> bool {
        Count::is_zero(self)
    }

    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }

    fn product(&self, other: &Self) -> Self {
        self * other
    }

    fn is_valid_weight(&self) -> bool {
        true
    }

    fn to_decimal(&self) -> String {
        self.to_string()
    }

    fn parse_decimal(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl Weight for f64 {
    const MODE: &'static str = "real";

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn accumulate(&mut self, other: &Self) {
        *self += *other;
    }

    fn product(&self, other: &Self) -> Self {
        self * other
    }

    fn is_valid_weight(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }

    fn to_decimal(&self) -> String {
        // Shortest representation that parses back to the same bits.
        format!("{self:?}")
    }

    fn parse_decimal(s: &str) -> Result<Self> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

// Keys stay below this so that differences of two keys never overflow.
const KEY_LIMIT: u128 = (i64::MAX / 4) as u128;

// Work (|T1|·|T2|) above which convolution is split across workers.
const PARALLEL_WORK: usize = 1 << 16;
const CHUNK: usize = 256;

/// `r_t(v)` for one digit set, degree and tuple length.
#[derive(Clone, Debug)]
pub struct RepresentationTable<W: Weight = Count> {
    k: u32,
    t: u32,
    domain: IntSet,
    weights: Option<Vec<W>>,
    entries: FxHashMap<PowerSumVector, W>,
}

impl<W: Weight> PartialEq for RepresentationTable<W> {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.t == other.t
            && self.domain == other.domain
            && self.weights == other.weights
            && self.entries == other.entries
    }
}

impl<W: Weight> RepresentationTable<W> {
    /// The `t = 0` table: the zero vector with multiplicity one.
    pub fn identity(domain: &IntSet, k: u32, weights: Option<Vec<W>>) -> Result<Self> {
        validate_domain(domain, k, weights.as_deref())?;
        let mut entries = FxHashMap::default();
        entries.insert(PowerSumVector::zero(k), W::one());
        Ok(RepresentationTable {
            k,
            t: 0,
            domain: domain.clone(),
            weights,
            entries,
        })
    }

    /// Table with `t = 1`. `weights`, when given, are indexed like the
    /// sorted domain; digits of weight zero do not appear as keys.
    pub fn build_single_weighted(
        domain: &IntSet,
        k: u32,
        weights: Option<Vec<W>>,
    ) -> Result<Self> {
        validate_domain(domain, k, weights.as_deref())?;
        check_key_range(domain, k, 1)?;
        let mut entries: FxHashMap<PowerSumVector, W> = FxHashMap::default();
        for (i, d) in domain.iter().enumerate() {
            let w = match &weights {
                Some(ws) => ws[i].clone(),
                None => W::one(),
            };
            if w.is_zero() {
                continue;
            }
            let v = checked_power_sum_vector(&[d], k).ok_or(Error::Overflow("power sums"))?;
            entries.entry(v).or_insert_with(W::zero).accumulate(&w);
        }
        Ok(RepresentationTable {
            k,
            t: 1,
            domain: domain.clone(),
            weights,
            entries,
        })
    }

    /// Table of tuple length `t`, built by balanced splitting.
    pub fn build_weighted(domain: &IntSet, k: u32, t: u32, weights: Option<Vec<W>>) -> Result<Self> {
        check_key_range(domain, k, t)?;
        let single = Self::build_single_weighted(domain, k, weights)?;
        single.power(t)
    }

    /// `t`-fold self-convolution of a `t = 1` table (meet in the middle:
    /// halves of length `⌈t/2⌉` and `⌊t/2⌋`, recursively).
    pub fn power(&self, t: u32) -> Result<Self> {
        self.require_single()?;
        check_key_range(&self.domain, self.k, t)?;
        self.power_balanced(t)
    }

    fn power_balanced(&self, t: u32) -> Result<Self> {
        match t {
            0 => Self::identity(&self.domain, self.k, self.weights.clone()),
            1 => Ok(self.clone()),
            _ => {
                let hi = self.power_balanced(t.div_ceil(2))?;
                if t % 2 == 0 {
                    hi.convolve(&hi)
                } else {
                    let lo = self.power_balanced(t / 2)?;
                    hi.convolve(&lo)
                }
            }
        }
    }

    /// `t`-fold power through a single split `t = split + (t - split)`.
    pub fn power_with_split(&self, t: u32, split: u32) -> Result<Self> {
        if split > t {
            return Err(Error::Invalid(format!("split {split} exceeds t = {t}")));
        }
        let left = self.power(split)?;
        let right = self.power(t - split)?;
        left.convolve(&right)
    }

    /// `t`-fold power by the naive left fold `((r * r) * r) * …`.
    pub fn power_naive(&self, t: u32) -> Result<Self> {
        self.require_single()?;
        check_key_range(&self.domain, self.k, t)?;
        let mut acc = Self::identity(&self.domain, self.k, self.weights.clone())?;
        for _ in 0..t {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    /// Table of length `t1 + t2` with `r(v) = Σ_u r1(u)·r2(v − u)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::Mismatch(format!("degrees {} and {}", self.k, other.k)));
        }
        if self.domain != other.domain || self.weights != other.weights {
            return Err(Error::Mismatch("digit sets or weights differ".into()));
        }
        let t = self.t + other.t;
        check_key_range(&self.domain, self.k, t)?;

        let left: Vec<(&PowerSumVector, &W)> = self.entries.iter().collect();
        let right: Vec<(&PowerSumVector, &W)> = other.entries.iter().collect();

        let entries = if left.len() * right.len() < PARALLEL_WORK {
            convolve_chunk(&left, &right)
        } else {
            // Fixed chunk size and in-order merge: same result for any
            // number of workers.
            let partials: Vec<FxHashMap<PowerSumVector, W>> = left
                .par_chunks(CHUNK)
                .map(|chunk| convolve_chunk(chunk, &right))
                .collect();
            let mut iter = partials.into_iter();
            let mut acc = iter.next().unwrap_or_default();
            for part in iter {
                for (v, w) in part {
                    acc.entry(v).or_insert_with(W::zero).accumulate(&w);
                }
            }
            acc
        };

        Ok(RepresentationTable {
            k: self.k,
            t,
            domain: self.domain.clone(),
            weights: self.weights.clone(),
            entries,
        })
    }

    /// `Σ_v r(v)·r(v − offset)`: the number of pairs `(x, y)` of `t`-tuples
    /// with `power_sum_vector(x) − power_sum_vector(y) = offset`.
    pub fn correlate(&self, offset: &PowerSumVector) -> W {
        self.correlate_with(self, offset)
    }

    /// `Σ_v self(v)·other(v − offset)`.
    pub fn correlate_with(&self, other: &Self, offset: &PowerSumVector) -> W {
        debug_assert_eq!(offset.k(), self.k);
        let mut acc = W::zero();
        for (v, w) in &self.entries {
            let Some(u) = v.checked_sub(offset) else { continue };
            if let Some(w2) = other.entries.get(&u) {
                acc.accumulate(&w.product(w2));
            }
        }
        acc
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn domain(&self) -> &IntSet {
        &self.domain
    }

    pub fn weights(&self) -> Option<&[W]> {
        self.weights.as_deref()
    }

    /// Number of stored (nonzero) entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: &PowerSumVector) -> Option<&W> {
        self.entries.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PowerSumVector, &W)> {
        self.entries.iter()
    }

    /// Entries in lexicographic key order.
    pub fn sorted_entries(&self) -> Vec<(&PowerSumVector, &W)> {
        let mut out: Vec<_> = self.entries.iter().collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }

    /// `Σ_v r_t(v)`.
    pub fn mass(&self) -> W {
        let mut acc = W::zero();
        for (_, w) in self.sorted_entries() {
            acc.accumulate(w);
        }
        acc
    }

    /// `t · R^j` with `R = max |d|`, the largest possible `|v_j|`.
    pub fn coordinate_bound(&self, j: u32) -> u128 {
        coordinate_bound(&self.domain, j, self.t).unwrap_or(u128::MAX)
    }

    fn require_single(&self) -> Result<()> {
        if self.t != 1 {
            return Err(Error::Invalid(format!(
                "powers are taken of t = 1 tables, this one has t = {}",
                self.t
            )));
        }
        Ok(())
    }

    pub fn to_file(&self) -> TableFile {
        TableFile {
            k: self.k,
            t: self.t,
            domain: self.domain.clone(),
            weight_mode: match self.weights {
                None => "unit".to_string(),
                Some(_) => W::MODE.to_string(),
            },
            weights: self
                .weights
                .as_ref()
                .map(|ws| ws.iter().map(W::to_decimal).collect()),
            entries: self
                .sorted_entries()
                .into_iter()
                .map(|(v, w)| TableRecord {
                    v: v.as_slice().to_vec(),
                    count: w.to_decimal(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &TableFile) -> Result<Self> {
        let weights = match (file.weight_mode.as_str(), &file.weights) {
            ("unit", None) => None,
            (mode, Some(ws)) if mode == W::MODE => Some(
                ws.iter()
                    .map(|s| W::parse_decimal(s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (mode, _) => {
                return Err(Error::Parse(format!(
                    "weight mode {mode:?} does not match a {} table",
                    W::MODE
                )))
            }
        };
        validate_domain(&file.domain, file.k, weights.as_deref())?;
        let mut entries = FxHashMap::default();
        for rec in &file.entries {
            if rec.v.len() != file.k as usize {
                return Err(Error::Parse(format!(
                    "key {:?} does not have k = {} coordinates",
                    rec.v, file.k
                )));
            }
            let w = W::parse_decimal(&rec.count)?;
            if w.is_zero() {
                continue;
            }
            if entries.insert(PowerSumVector::from_slice(&rec.v), w).is_some() {
                return Err(Error::Parse(format!("duplicate key {:?}", rec.v)));
            }
        }
        Ok(RepresentationTable {
            k: file.k,
            t: file.t,
            domain: file.domain.clone(),
            weights,
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&file)
    }
}

impl RepresentationTable<Count> {
    /// Unit-weight table with `t = 1`.
    pub fn build_single(domain: &IntSet, k: u32) -> Result<Self> {
        Self::build_single_weighted(domain, k, None)
    }

    /// Unit-weight table of tuple length `t`.
    pub fn build(domain: &IntSet, k: u32, t: u32) -> Result<Self> {
        Self::build_weighted(domain, k, t, None)
    }
}

fn convolve_chunk<W: Weight>(
    left: &[(&PowerSumVector, &W)],
    right: &[(&PowerSumVector, &W)],
) -> FxHashMap<PowerSumVector, W> {
    let mut out: FxHashMap<PowerSumVector, W> = FxHashMap::default();
    for (u, wu) in left {
        for (v, wv) in right {
            // In range by check_key_range.
            let key = *u + *v;
            out.entry(key).or_insert_with(W::zero).accumulate(&wu.product(wv));
        }
    }
    out
}

fn validate_domain<W: Weight>(domain: &IntSet, k: u32, weights: Option<&[W]>) -> Result<()> {
    if domain.is_empty() {
        return Err(Error::Invalid("digit set must be nonempty".into()));
    }
    if k == 0 {
        return Err(Error::Invalid("degree k must be at least 1".into()));
    }
    if let Some(ws) = weights {
        if ws.len() != domain.len() {
            return Err(Error::Invalid(format!(
                "{} weights for {} digits",
                ws.len(),
                domain.len()
            )));
        }
        if let Some(bad) = ws.iter().find(|w| !w.is_valid_weight()) {
            return Err(Error::Invalid(format!(
                "weights must be finite and nonnegative, got {bad:?}"
            )));
        }
    }
    Ok(())
}

fn coordinate_bound(domain: &IntSet, j: u32, t: u32) -> Option<u128> {
    (domain.max_abs() as u128)
        .checked_pow(j)?
        .checked_mul(t as u128)
}

/// Every key of a length-`t` table, and every difference of two keys, must
/// fit in `i64`.
pub(crate) fn check_key_range(domain: &IntSet, k: u32, t: u32) -> Result<()> {
    match coordinate_bound(domain, k, t) {
        Some(b) if b <= KEY_LIMIT => Ok(()),
        _ => Err(Error::Overflow("power-sum coordinates of the requested table")),
    }
}

/// Serialized form: a header followed by `(key, count)` records, counts as
/// decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub k: u32,
    pub t: u32,
    pub domain: IntSet,
    pub weight_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    pub entries: Vec<TableRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub v: Vec<i64>,
    pub count: String,
}
