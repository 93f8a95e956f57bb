//! Closed-form exponents and empirical growth rates.
//!
//! For `s < k(k+1)/2` and `a != 0` with first nonzero index `ℓ`, solution
//! counts satisfy `J_{s,k}(X;a) ≪ X^{s − min(1/2, η) + ε}` with
//! `η = (k−ℓ)(k−ℓ+1)/2 · (1 − 2s/(k(k+1)))`. This module evaluates those
//! exponents exactly and fits slopes to scans of exact counts.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::count::Count;
use crate::engine::{count_j_restricted, count_j_with_budget, Budget};
use crate::error::{Error, Result};
use crate::model::{critical_s, sumset, IntSet, RhsVector, SystemShape};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `η_{s,k}(ℓ) = (k−ℓ)(k−ℓ+1)/2 · (1 − 2s/(k(k+1)))`, exactly.
///
/// Defined for every `s`; it is negative once `s > k(k+1)/2`.
pub fn eta(s: u32, k: u32, ell: u32) -> Result<BigRational> {
    if ell < 1 || ell > k {
        return Err(Error::EllOutOfRange { ell, k });
    }
    let d = (k - ell) as u64;
    let kk = k as u64 * (k as u64 + 1);
    let first = BigRational::new(BigInt::from(d * (d + 1)), BigInt::from(2));
    let second = BigRational::one() - BigRational::new(BigInt::from(2 * s as u64), BigInt::from(kk));
    Ok(first * second)
}

/// `σ = k(k+1) / (2(k(k+1) − 2s))`, the conjugate exponent in the Hölder
/// split. Requires `s < k(k+1)/2`.
pub fn sigma(s: u32, k: u32) -> Result<BigRational> {
    let crit = critical_s(k);
    if s as u64 >= crit {
        return Err(Error::NotSubcritical {
            s,
            critical: crit as u32,
        });
    }
    let kk = k as u64 * (k as u64 + 1);
    Ok(BigRational::new(
        BigInt::from(kk),
        BigInt::from(2 * (kk - 2 * s as u64)),
    ))
}

/// `2s/(k(k+1)) + 1/(2σ)`; equal to 1 for every subcritical `s`.
pub fn holder_conjugacy_sum(s: u32, k: u32) -> Result<BigRational> {
    let sig = sigma(s, k)?;
    let kk = k as u64 * (k as u64 + 1);
    Ok(BigRational::new(BigInt::from(2 * s as u64), BigInt::from(kk))
        + (int(2) * sig).recip())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub k: u32,
    /// `k − (√(2k² + 2k + 1) − 1)/2`.
    pub value: f64,
    /// Largest integer `ℓ >= 1` not above the threshold, if any.
    pub largest_ell: Option<u32>,
}

/// `ℓ <= k − (√(2k²+2k+1) − 1)/2`, decided in exact integers as
/// `(2(k−ℓ) + 1)² >= 2k² + 2k + 1`.
pub fn ell_within_threshold(k: u32, ell: u32) -> bool {
    if ell > k {
        return false;
    }
    let k = k as u128;
    let m = k - ell as u128;
    (2 * m + 1).pow(2) >= 2 * k * k + 2 * k + 1
}

pub fn critical_ell_threshold(k: u32) -> Result<Threshold> {
    if k < 2 {
        return Err(Error::Invalid(format!("threshold needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let value = kf - ((2.0 * kf * kf + 2.0 * kf + 1.0).sqrt() - 1.0) / 2.0;
    // The surd may land on an integer (k = 3 gives exactly 1), so the
    // floating estimate is only a starting point.
    let mut ell = value.floor().max(0.0) as u32;
    while ell < k && ell_within_threshold(k, ell + 1) {
        ell += 1;
    }
    while ell >= 1 && !ell_within_threshold(k, ell) {
        ell -= 1;
    }
    Ok(Threshold {
        k,
        value,
        largest_ell: (ell >= 1).then_some(ell),
    })
}

fn ser_rat<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_rat<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Exponents predicted for `(s, k, ℓ)`; rationals serialize as `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub s: u32,
    pub k: u32,
    pub ell: Option<u32>,
    pub subcritical: bool,
    #[serde(serialize_with = "ser_opt_rat")]
    pub eta: Option<BigRational>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub sigma: Option<BigRational>,
    /// `s − min(1/2, η)`; only for `a != 0` in the subcritical range.
    #[serde(serialize_with = "ser_opt_rat")]
    pub bound_exponent: Option<BigRational>,
    pub trivial_exponent: u32,
    /// `2s − k(k+1)/2`.
    #[serde(serialize_with = "ser_rat")]
    pub supercritical_exponent: BigRational,
    pub critical_ell_threshold: Option<f64>,
    pub threshold_largest_ell: Option<u32>,
}

pub fn predicted_exponents(s: u32, k: u32, ell: Option<u32>) -> Result<ExponentReport> {
    if s == 0 || k == 0 {
        return Err(Error::Invalid(format!("need s, k >= 1 (got s={s}, k={k})")));
    }
    let subcritical = (s as u64) < critical_s(k);
    let eta = ell.map(|l| eta(s, k, l)).transpose()?;
    let sigma = subcritical.then(|| sigma(s, k)).transpose()?;
    let half = rat(1, 2);
    let bound_exponent = match (&eta, subcritical) {
        (Some(e), true) => Some(int(s as u64) - if *e < half { e.clone() } else { half }),
        _ => None,
    };
    let threshold = (k >= 2).then(|| critical_ell_threshold(k)).transpose()?;
    Ok(ExponentReport {
        s,
        k,
        ell,
        subcritical,
        eta,
        sigma,
        bound_exponent,
        trivial_exponent: s,
        supercritical_exponent: int(2 * s as u64) - int(critical_s(k)),
        critical_ell_threshold: threshold.as_ref().map(|t| t.value),
        threshold_largest_ell: threshold.and_then(|t| t.largest_ell),
    })
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    #[serde(rename = "X")]
    pub x: u64,
    pub count: Count,
}

/// Exact counts `J_{s,k}(X;a)` at increasing `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub s: u32,
    pub k: u32,
    pub a: RhsVector,
    pub points: Vec<ScanPoint>,
    /// First `X` refused by the budget; later radii were not attempted.
    pub truncated_at: Option<u64>,
}

/// `{x0·2^i : 0 <= i < steps}`.
pub fn geometric_radii(x0: u64, steps: u32) -> Vec<u64> {
    (0..steps).map(|i| x0 << i).collect()
}

pub fn scan(s: u32, k: u32, a: &RhsVector, radii: &[u64], budget: &Budget) -> Result<ScanResult> {
    if radii.is_empty() {
        return Err(Error::Invalid("scan needs at least one radius".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("scan radii must be strictly increasing".into()));
    }
    let shapes = radii
        .iter()
        .map(|&x| SystemShape::new(s, k, x))
        .collect::<Result<Vec<_>>>()?;
    a.check_degree(k)?;
    let results: Vec<Result<Count>> = shapes
        .par_iter()
        .map(|&shape| count_j_with_budget(shape, a, budget).map(|r| r.value))
        .collect();
    let mut points = Vec::new();
    let mut truncated_at = None;
    for (shape, res) in shapes.iter().zip(results) {
        match res {
            Ok(count) => points.push(ScanPoint { x: shape.x, count }),
            Err(Error::Budget { .. }) => {
                truncated_at = Some(shape.x);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ScanResult {
        s,
        k,
        a: a.clone(),
        points,
        truncated_at,
    })
}

impl ScanResult {
    /// Columns `X,count,log10X,log10count`; counts as exact decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("X,count,log10X,log10count\n");
        for p in &self.points {
            let log_count = if p.count.is_zero() {
                "-inf".to_string()
            } else {
                format!("{:.12}", p.count.ln() / std::f64::consts::LN_10)
            };
            let _ = writeln!(
                out,
                "{},{},{:.12},{}",
                p.x,
                p.count,
                (p.x as f64).log10(),
                log_count
            );
        }
        out
    }

    /// Reads the `X` and `count` columns written by [`ScanResult::to_csv`].
    pub fn points_from_csv(text: &str) -> Result<Vec<ScanPoint>> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty scan CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let xi = cols
            .iter()
            .position(|c| *c == "X")
            .ok_or_else(|| Error::Parse("scan CSV lacks an X column".into()))?;
        let ci = cols
            .iter()
            .position(|c| *c == "count")
            .ok_or_else(|| Error::Parse("scan CSV lacks a count column".into()))?;
        lines
            .map(|line| {
                let fields: Vec<&str> = line.split(',').map(str::trim).collect();
                let x = fields
                    .get(xi)
                    .and_then(|v| v.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad X in {line:?}")))?;
                let count = fields
                    .get(ci)
                    .ok_or_else(|| Error::Parse(format!("missing count in {line:?}")))?
                    .parse::<Count>()?;
                Ok(ScanPoint { x, count })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    /// Least-squares slope of `ln count` against `ln X`.
    pub slope: f64,
    /// Intercept in natural-log units.
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points_used: usize,
    /// Radii dropped because their count was zero.
    pub excluded: Vec<u64>,
    /// `ln(c_last / c_first) / ln(X_last / X_first)`.
    pub endpoint_slope: f64,
}

/// Ordinary least squares on `(ln X, ln count)` over points with positive
/// counts. Needs at least three.
pub fn fit_exponent(points: &[ScanPoint]) -> Result<FitResult> {
    let excluded: Vec<u64> = points.iter().filter(|p| p.count.is_zero()).map(|p| p.x).collect();
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.count.is_zero())
        .map(|p| ((p.x as f64).ln(), p.count.ln()))
        .collect();
    if data.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs 3 points with positive counts, got {} ({} zero counts excluded)",
            data.len(),
            excluded.len()
        )));
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|d| (d.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all radii are equal".into()));
    }
    let sxy: f64 = data.iter().map(|d| (d.0 - mx) * (d.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (data.iter().map(|d| (d.1 - intercept - slope * d.0).powi(2)).sum::<f64>() / n).sqrt();
    let (first, last) = (data[0], data[data.len() - 1]);
    Ok(FitResult {
        slope,
        intercept,
        residual,
        points_used: data.len(),
        excluded,
        endpoint_slope: (last.1 - first.1) / (last.0 - first.0),
    })
}

/// `|X + H|^s · (|H|^{−1/2} + |H|^{−η})`, without the implied constant or
/// the `X^ε` factor.
pub fn tsets_bound(x_set: &IntSet, h_set: &IntSet, s: u32, k: u32, ell: u32) -> Result<f64> {
    if x_set.is_empty() || h_set.is_empty() {
        return Err(Error::Invalid("bound needs nonempty sets".into()));
    }
    let eta = to_f64(&eta(s, k, ell)?);
    let sum = sumset(x_set, h_set).len() as f64;
    let h = h_set.len() as f64;
    Ok(sum.powi(s as i32) * (h.powf(-0.5) + h.powf(-eta)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TsetsReport {
    pub ell: u32,
    pub count: Count,
    pub bound: f64,
    pub ratio: f64,
}

/// Exact restricted count next to [`tsets_bound`].
pub fn tsets_report(
    x_set: &IntSet,
    h_set: &IntSet,
    s: u32,
    k: u32,
    a: &RhsVector,
    budget: &Budget,
) -> Result<TsetsReport> {
    let ell = a.ell().ok_or(Error::ZeroRhs)?;
    let bound = tsets_bound(x_set, h_set, s, k, ell)?;
    let count = count_j_restricted(x_set, s, k, a, budget)?.value;
    Ok(TsetsReport {
        ell,
        ratio: count.to_f64() / bound,
        count,
        bound,
    })
}
