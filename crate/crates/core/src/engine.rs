//! Exact counting of solutions.
//!
//! `J_{s,k}(X;a)` is the number of `x, y ∈ [−X, X]^s` with
//! `Σ_i (x_i^j − y_i^j) = a_j` for `1 <= j <= k`. `H_{s,k}(X;a)` counts
//! `z, w ∈ [−2X, 2X]^s` and `|h| <= X` with right-hand side `p(h)` from
//! [`crate::shift`]. Both are correlations of a single representation table.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::count::Count;
use crate::error::{Error, Result};
use crate::expsum::WeightSequence;
use crate::model::{checked_power_sum_vector, sumset, IntSet, PowerSumVector, RhsVector, SystemShape};
use crate::shift::ShiftPolynomialFamily;
use crate::table::{check_key_range, RepresentationTable};

/// Caps on the work an operation may take on before refusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Tuples enumerated by the brute-force oracle.
    pub enumeration: u128,
    /// Points of a torus grid.
    pub grid_points: u128,
    /// Upper estimate of distinct keys in a representation table.
    pub table_keys: u128,
}

impl Budget {
    pub const DEFAULT_ENUMERATION: u128 = 100_000_000;

    pub fn with_enumeration(enumeration: u128) -> Self {
        Budget {
            enumeration,
            ..Budget::default()
        }
    }

    pub fn unlimited() -> Self {
        Budget {
            enumeration: u128::MAX,
            grid_points: u128::MAX,
            table_keys: u128::MAX,
        }
    }

    pub(crate) fn check(&self, what: &'static str, needed: u128, limit: u128) -> Result<()> {
        if needed > limit {
            return Err(Error::Budget { what, needed, limit });
        }
        Ok(())
    }

    /// Refuses tables whose multiset count `C(n + t − 1, t)` exceeds the cap.
    pub fn check_table(&self, digits: usize, t: u32) -> Result<()> {
        self.check("table keys", multiset_count(digits as u128, t), self.table_keys)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enumeration: Self::DEFAULT_ENUMERATION,
            grid_points: 100_000_000,
            table_keys: 50_000_000,
        }
    }
}

/// `C(n + t − 1, t)`, saturating.
fn multiset_count(n: u128, t: u32) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=t as u128 {
        acc = match acc.checked_mul(n + i - 1) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

fn checked_pow(base: u128, exp: u32) -> u128 {
    base.checked_pow(exp).unwrap_or(u128::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "J")]
    J,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "J_restricted")]
    JRestricted,
    #[serde(rename = "H_restricted")]
    HRestricted,
    #[serde(rename = "phi")]
    Phi,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Quantity::J => "J",
            Quantity::H => "H",
            Quantity::JRestricted => "J_restricted",
            Quantity::HRestricted => "H_restricted",
            Quantity::Phi => "phi",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Convolution,
    BruteForce,
    DftCheck,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Convolution => "convolution",
            Method::BruteForce => "brute-force",
            Method::DftCheck => "dft-check",
        })
    }
}

/// What a count ranges over: the full box, or explicit sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Box(SystemShape),
    Sets {
        s: u32,
        k: u32,
        x_set: IntSet,
        h_set: Option<IntSet>,
    },
}

impl Subject {
    pub fn s(&self) -> u32 {
        match self {
            Subject::Box(shape) => shape.s,
            Subject::Sets { s, .. } => *s,
        }
    }

    pub fn k(&self) -> u32 {
        match self {
            Subject::Box(shape) => shape.k,
            Subject::Sets { k, .. } => *k,
        }
    }

    pub fn radius(&self) -> Option<u64> {
        match self {
            Subject::Box(shape) => Some(shape.x),
            Subject::Sets { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub quantity: Quantity,
    pub subject: Subject,
    pub a: RhsVector,
    pub value: Count,
    pub method: Method,
    pub elapsed: Duration,
}

/// True when some `|a_j|` exceeds `2·t·R^j`, so no pair of `t`-tuples with
/// entries in `[−R, R]` can realize `a`.
fn out_of_range(a: &[i64], t: u32, radius: u64) -> bool {
    a.iter().enumerate().any(|(i, &aj)| {
        let bound = checked_pow(radius as u128, i as u32 + 1).saturating_mul(2 * t as u128);
        aj.unsigned_abs() as u128 > bound
    })
}

/// Table over `[−X, X]` reused for many right-hand sides.
#[derive(Clone, Debug)]
pub struct JCounter {
    shape: SystemShape,
    table: RepresentationTable,
}

impl JCounter {
    pub fn new(shape: SystemShape, budget: &Budget) -> Result<Self> {
        let domain = shape.box_set();
        budget.check_table(domain.len(), shape.s)?;
        let table = RepresentationTable::build(&domain, shape.k, shape.s)?;
        Ok(JCounter { shape, table })
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn table(&self) -> &RepresentationTable {
        &self.table
    }

    /// `J_{s,k}(X;a)`.
    pub fn count(&self, a: &RhsVector) -> Result<Count> {
        a.check_degree(self.shape.k)?;
        if out_of_range(a.as_slice(), self.shape.s, self.shape.x) {
            return Ok(Count::ZERO);
        }
        Ok(self.table.correlate(&a.to_power_sum()))
    }
}

/// Table over `[−2X, 2X]` reused across all shifts and right-hand sides.
#[derive(Clone, Debug)]
pub struct HCounter {
    shape: SystemShape,
    table: RepresentationTable,
}

impl HCounter {
    pub fn new(shape: SystemShape, budget: &Budget) -> Result<Self> {
        let r = 2 * shape.x as i64;
        let domain = IntSet::interval(-r, r);
        budget.check_table(domain.len(), shape.s)?;
        let table = RepresentationTable::build(&domain, shape.k, shape.s)?;
        Ok(HCounter { shape, table })
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    /// `H_{s,k}(X;a)`.
    pub fn count(&self, a: &RhsVector) -> Result<Count> {
        a.check_degree(self.shape.k)?;
        let family = ShiftPolynomialFamily::new(a)?;
        let x = self.shape.x as i64;
        shifted_sum(&self.table, &family, (-x..=x).collect(), self.shape.s, 2 * self.shape.x)
    }
}

/// `Σ_{h ∈ shifts} Σ_v R(v)·R(v − p(h))`, parallel over `h`.
fn shifted_sum(
    table: &RepresentationTable,
    family: &ShiftPolynomialFamily,
    shifts: Vec<i64>,
    s: u32,
    radius: u64,
) -> Result<Count> {
    let per_shift = |h: &i64| -> Result<Count> {
        let target = family.evaluate(*h)?;
        if out_of_range(target.as_slice(), s, radius) {
            return Ok(Count::ZERO);
        }
        Ok(table.correlate(&target))
    };
    let parts: Vec<Count> = if shifts.len() * table.len() > 1 << 14 {
        shifts.par_iter().map(per_shift).collect::<Result<_>>()?
    } else {
        shifts.iter().map(per_shift).collect::<Result<_>>()?
    };
    Ok(parts.into_iter().sum())
}

pub fn count_j(shape: SystemShape, a: &RhsVector) -> Result<CountResult> {
    count_j_with_budget(shape, a, &Budget::default())
}

pub fn count_j_with_budget(shape: SystemShape, a: &RhsVector, budget: &Budget) -> Result<CountResult> {
    let start = Instant::now();
    a.check_degree(shape.k)?;
    let value = if out_of_range(a.as_slice(), shape.s, shape.x) {
        Count::ZERO
    } else {
        JCounter::new(shape, budget)?.count(a)?
    };
    Ok(CountResult {
        quantity: Quantity::J,
        subject: Subject::Box(shape),
        a: a.clone(),
        value,
        method: Method::Convolution,
        elapsed: start.elapsed(),
    })
}

pub fn count_h(shape: SystemShape, a: &RhsVector) -> Result<CountResult> {
    count_h_with_budget(shape, a, &Budget::default())
}

pub fn count_h_with_budget(shape: SystemShape, a: &RhsVector, budget: &Budget) -> Result<CountResult> {
    let start = Instant::now();
    a.check_degree(shape.k)?;
    let value = HCounter::new(shape, budget)?.count(a)?;
    Ok(CountResult {
        quantity: Quantity::H,
        subject: Subject::Box(shape),
        a: a.clone(),
        value,
        method: Method::Convolution,
        elapsed: start.elapsed(),
    })
}

/// Solutions with every variable in `x_set`.
pub fn count_j_restricted(
    x_set: &IntSet,
    s: u32,
    k: u32,
    a: &RhsVector,
    budget: &Budget,
) -> Result<CountResult> {
    let start = Instant::now();
    if x_set.is_empty() {
        return Err(Error::Invalid("restricted counts need a nonempty set".into()));
    }
    check_sk(s, k)?;
    a.check_degree(k)?;
    let value = if out_of_range(a.as_slice(), s, x_set.max_abs()) {
        Count::ZERO
    } else {
        budget.check_table(x_set.len(), s)?;
        RepresentationTable::build(x_set, k, s)?.correlate(&a.to_power_sum())
    };
    Ok(CountResult {
        quantity: Quantity::JRestricted,
        subject: Subject::Sets {
            s,
            k,
            x_set: x_set.clone(),
            h_set: None,
        },
        a: a.clone(),
        value,
        method: Method::Convolution,
        elapsed: start.elapsed(),
    })
}

/// `Σ_{h ∈ h_set}` of the solutions over `(x_set + h_set)` with right-hand
/// side `p(h)`.
pub fn count_h_restricted(
    x_set: &IntSet,
    h_set: &IntSet,
    s: u32,
    k: u32,
    a: &RhsVector,
    budget: &Budget,
) -> Result<CountResult> {
    let start = Instant::now();
    if x_set.is_empty() || h_set.is_empty() {
        return Err(Error::Invalid("restricted counts need nonempty sets".into()));
    }
    check_sk(s, k)?;
    a.check_degree(k)?;
    let domain = sumset(x_set, h_set);
    budget.check_table(domain.len(), s)?;
    let table = RepresentationTable::build(&domain, k, s)?;
    let family = ShiftPolynomialFamily::new(a)?;
    let value = shifted_sum(&table, &family, h_set.as_slice().to_vec(), s, domain.max_abs())?;
    Ok(CountResult {
        quantity: Quantity::HRestricted,
        subject: Subject::Sets {
            s,
            k,
            x_set: x_set.clone(),
            h_set: Some(h_set.clone()),
        },
        a: a.clone(),
        value,
        method: Method::Convolution,
        elapsed: start.elapsed(),
    })
}

/// Weighted moment `Φ(n)`: every solution pair `(x, y)` of the system with
/// right-hand side `n` contributes `Π c_{x_i} · Π c_{y_i}`.
///
/// Only nonnegative real weights are accepted.
pub fn weighted_phi(weights: &WeightSequence, s: u32, k: u32, n: &RhsVector, budget: &Budget) -> Result<f64> {
    check_sk(s, k)?;
    n.check_degree(k)?;
    let real = weights.nonnegative_reals()?;
    let domain = IntSet::interval(-(weights.radius() as i64), weights.radius() as i64);
    if real.iter().all(|&w| w == 0.0) {
        return Ok(0.0);
    }
    if out_of_range(n.as_slice(), s, weights.radius()) {
        return Ok(0.0);
    }
    budget.check_table(domain.len(), s)?;
    let table = RepresentationTable::<f64>::build_weighted(&domain, k, s, Some(real))?;
    Ok(table.correlate(&n.to_power_sum()))
}

/// Reusable weighted table for many offsets `n`.
#[derive(Clone, Debug)]
pub struct PhiCounter {
    table: RepresentationTable<f64>,
    s: u32,
    radius: u64,
}

impl PhiCounter {
    pub fn new(weights: &WeightSequence, s: u32, k: u32, budget: &Budget) -> Result<Self> {
        check_sk(s, k)?;
        let real = weights.nonnegative_reals()?;
        let domain = IntSet::interval(-(weights.radius() as i64), weights.radius() as i64);
        budget.check_table(domain.len(), s)?;
        let table = RepresentationTable::<f64>::build_weighted(&domain, k, s, Some(real))?;
        Ok(PhiCounter {
            table,
            s,
            radius: weights.radius(),
        })
    }

    pub fn phi(&self, n: &RhsVector) -> Result<f64> {
        n.check_degree(self.table.k())?;
        if out_of_range(n.as_slice(), self.s, self.radius) {
            return Ok(0.0);
        }
        Ok(self.table.correlate(&n.to_power_sum()))
    }
}

fn check_sk(s: u32, k: u32) -> Result<()> {
    if s == 0 || k == 0 {
        return Err(Error::Invalid(format!("need s, k >= 1 (got s={s}, k={k})")));
    }
    Ok(())
}

/// Power-sum vectors of every tuple in `[−X, X]^s`, in odometer order.
fn all_tuple_sums(shape: SystemShape) -> Result<Vec<PowerSumVector>> {
    let digits: Vec<i64> = shape.box_set().iter().collect();
    check_key_range(&shape.box_set(), shape.k, shape.s)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; shape.s as usize];
    let mut tuple = vec![digits[0]; shape.s as usize];
    loop {
        out.push(
            checked_power_sum_vector(&tuple, shape.k).ok_or(Error::Overflow("power sums"))?,
        );
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < digits.len() {
                tuple[pos] = digits[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = digits[0];
            pos += 1;
        }
    }
}

fn check_enumeration(shape: SystemShape, budget: &Budget) -> Result<()> {
    let tuples = checked_pow(2 * shape.x as u128 + 1, 2 * shape.s);
    budget.check("brute-force tuples", tuples, budget.enumeration)
}

/// Direct enumeration of all `(2X+1)^{2s}` pairs `(x, y)`.
pub fn brute_force_j(shape: SystemShape, a: &RhsVector, budget: &Budget) -> Result<CountResult> {
    let start = Instant::now();
    a.check_degree(shape.k)?;
    check_enumeration(shape, budget)?;
    let sums = all_tuple_sums(shape)?;
    let target = a.to_power_sum();
    let hits: u64 = sums
        .par_iter()
        .map(|px| {
            sums.iter()
                .filter(|py| px.checked_sub(py).as_ref() == Some(&target))
                .count() as u64
        })
        .sum();
    Ok(CountResult {
        quantity: Quantity::J,
        subject: Subject::Box(shape),
        a: a.clone(),
        value: Count::from(hits),
        method: Method::BruteForce,
        elapsed: start.elapsed(),
    })
}

/// Direct enumeration of all pairs `(x, y)`, bucketed by
/// `power_sum_vector(x) − power_sum_vector(y)`: the brute-force value of
/// `J_{s,k}(X;a)` for every `a` at once (absent keys are zero).
pub fn brute_force_histogram(
    shape: SystemShape,
    budget: &Budget,
) -> Result<FxHashMap<PowerSumVector, u64>> {
    check_enumeration(shape, budget)?;
    let sums = all_tuple_sums(shape)?;
    let mut hist: FxHashMap<PowerSumVector, u64> = FxHashMap::default();
    for px in &sums {
        for py in &sums {
            *hist.entry(px - py).or_insert(0) += 1;
        }
    }
    Ok(hist)
}
