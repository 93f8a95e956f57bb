//! Shifting polynomials.
//!
//! Replacing every variable `x_i, y_i` by `x_i + h, y_i + h` turns the
//! right-hand side `a` into `(p_1(h), …, p_k(h))` with
//! `p_j(h) = Σ_{m=1}^{j} C(j, m)·a_m·h^{j−m}`. The degree of `p_j` is
//! `max(0, j − ℓ)` where `ℓ` is the first nonzero index of `a`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::count::Count;
use crate::engine::{self, Budget};
use crate::error::{Error, Result};
use crate::model::{PowerSumVector, RhsVector, SystemShape};

/// Rows `0..=k` of Pascal's triangle in exact integers.
pub fn pascal_rows(k: u32) -> Result<Vec<Vec<i128>>> {
    let mut rows: Vec<Vec<i128>> = vec![vec![1]];
    for n in 1..=k as usize {
        let prev = &rows[n - 1];
        let mut row = vec![1i128; n + 1];
        for m in 1..n {
            row[m] = prev[m - 1]
                .checked_add(prev[m])
                .ok_or(Error::Overflow("binomial coefficients"))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Coefficient table of `p_1, …, p_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftPolynomialFamily {
    k: u32,
    a: RhsVector,
    /// `rows[j-1][e]` is the coefficient of `h^e` in `p_j`.
    rows: Vec<Vec<i128>>,
}

impl ShiftPolynomialFamily {
    pub fn new(a: &RhsVector) -> Result<Self> {
        let k = a.k();
        let binom = pascal_rows(k)?;
        let mut rows = Vec::with_capacity(k as usize);
        for j in 1..=k as usize {
            let mut row = vec![0i128; j];
            for m in 1..=j {
                row[j - m] = binom[j][m]
                    .checked_mul(a.as_slice()[m - 1] as i128)
                    .ok_or(Error::Overflow("shift polynomial coefficients"))?;
            }
            rows.push(row);
        }
        Ok(ShiftPolynomialFamily {
            k,
            a: a.clone(),
            rows,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn rhs(&self) -> &RhsVector {
        &self.a
    }

    pub fn rows(&self) -> &[Vec<i128>] {
        &self.rows
    }

    /// Coefficient of `h^e` in `p_j` (1-based `j`).
    pub fn coefficient(&self, j: u32, e: u32) -> i128 {
        self.rows
            .get(j as usize - 1)
            .and_then(|row| row.get(e as usize))
            .copied()
            .unwrap_or(0)
    }

    /// `p_j(h)` by Horner's rule.
    pub fn evaluate_row(&self, j: u32, h: i64) -> Result<i128> {
        let row = &self.rows[j as usize - 1];
        let h = h as i128;
        let mut acc: i128 = 0;
        for &c in row.iter().rev() {
            acc = acc
                .checked_mul(h)
                .and_then(|v| v.checked_add(c))
                .ok_or(Error::Overflow("shift polynomial evaluation"))?;
        }
        Ok(acc)
    }

    /// `(p_1(h), …, p_k(h))`.
    pub fn evaluate(&self, h: i64) -> Result<PowerSumVector> {
        let mut out = Vec::with_capacity(self.k as usize);
        for j in 1..=self.k {
            let v = self.evaluate_row(j, h)?;
            out.push(i64::try_from(v).map_err(|_| Error::Overflow("shift polynomial evaluation"))?);
        }
        Ok(PowerSumVector::from_slice(&out))
    }

    /// Degree of each row read off the coefficients; zero rows count as 0.
    pub fn realized_degrees(&self) -> Vec<u32> {
        self.rows
            .iter()
            .map(|row| row.iter().rposition(|&c| c != 0).unwrap_or(0) as u32)
            .collect()
    }

    /// `(max(0, j − ℓ))_{j=1..k}`, checked against the realized degrees.
    pub fn degree_profile(&self) -> Result<Vec<u32>> {
        let ell = self.a.ell().ok_or(Error::ZeroRhs)?;
        let predicted: Vec<u32> = (1..=self.k).map(|j| j.saturating_sub(ell)).collect();
        let realized = self.realized_degrees();
        if predicted != realized {
            return Err(Error::Invariant(format!(
                "degree profile {realized:?} differs from max(0, j - {ell}) = {predicted:?}"
            )));
        }
        Ok(predicted)
    }

    /// Leading coefficient of `p_j` (the coefficient of `h^{deg p_j}`).
    pub fn leading_coefficient(&self, j: u32) -> i128 {
        let deg = self.realized_degrees()[j as usize - 1];
        self.coefficient(j, deg)
    }

    /// Largest `|p_j(h)|` over `|h| <= radius`.
    pub fn max_abs_on(&self, j: u32, radius: u64) -> Result<u128> {
        let r = radius as i64;
        let mut best = 0u128;
        for h in -r..=r {
            best = best.max(self.evaluate_row(j, h)?.unsigned_abs());
        }
        Ok(best)
    }

    /// One line per row, e.g. `p_3(h) = 3h + 1`.
    pub fn display_rows(&self) -> Vec<String> {
        (1..=self.k)
            .map(|j| format!("p_{j}(h) = {}", format_poly(&self.rows[j as usize - 1])))
            .collect()
    }
}

impl fmt::Display for ShiftPolynomialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.display_rows() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn format_poly(row: &[i128]) -> String {
    let mut terms = Vec::new();
    for (e, &c) in row.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mag = c.unsigned_abs();
        let body = match (e, mag) {
            (0, _) => mag.to_string(),
            (1, 1) => "h".to_string(),
            (1, _) => format!("{mag}h"),
            (_, 1) => format!("h^{e}"),
            _ => format!("{mag}h^{e}"),
        };
        if terms.is_empty() {
            terms.push(if c < 0 { format!("-{body}") } else { body });
        } else {
            terms.push(format!("{} {body}", if c < 0 { "-" } else { "+" }));
        }
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" ")
    }
}

pub fn build_family(a: &RhsVector) -> Result<ShiftPolynomialFamily> {
    ShiftPolynomialFamily::new(a)
}

/// `(x + h, y + h)` componentwise.
pub fn shift_solution(x: &[i64], y: &[i64], h: i64) -> (Vec<i64>, Vec<i64>) {
    (
        x.iter().map(|v| v + h).collect(),
        y.iter().map(|v| v + h).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub shape: SystemShape,
    pub a: RhsVector,
    #[serde(rename = "J")]
    pub j: Count,
    #[serde(rename = "H")]
    pub h: Count,
    /// `H / ((2X+1)·J)`, present when `J > 0`.
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Option<BigRational>,
    pub holds: bool,
}

fn ser_ratio<S: serde::Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Computes `J_{s,k}(X;a)` and `H_{s,k}(X;a)` and checks
/// `H >= (2X+1)·J`: each of the `2X+1` shifts maps solutions of the
/// original system injectively into solutions of the shifted one.
pub fn verify_lemma(shape: SystemShape, a: &RhsVector, budget: &Budget) -> Result<LemmaReport> {
    let j = engine::count_j_with_budget(shape, a, budget)?.value;
    let h = engine::count_h_with_budget(shape, a, budget)?.value;
    let shifts = Count::from(2 * shape.x + 1);
    let lower = &shifts * &j;
    let ratio = if j.is_zero() {
        None
    } else {
        Some(BigRational::new(
            BigInt::from(h.to_biguint()),
            BigInt::from(lower.to_biguint()),
        ))
    };
    Ok(LemmaReport {
        shape,
        a: a.clone(),
        holds: h >= lower,
        j,
        h,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::power_sum_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rhs(a: &[i64]) -> RhsVector {
        RhsVector::new(a.to_vec()).unwrap()
    }

    #[test]
    fn family_examples() {
        let f = build_family(&rhs(&[1, 0])).unwrap();
        assert_eq!(f.rows(), &[vec![1], vec![0, 2]]);
        let f = build_family(&rhs(&[0, 1, 0])).unwrap();
        assert_eq!(f.rows(), &[vec![0], vec![1, 0], vec![0, 3, 0]]);
        assert_eq!(
            f.display_rows(),
            vec!["p_1(h) = 0", "p_2(h) = 1", "p_3(h) = 3h"]
        );
    }

    #[test]
    fn evaluation_examples() {
        let f = build_family(&rhs(&[1, 0])).unwrap();
        assert_eq!(f.evaluate(3).unwrap().as_slice(), &[1, 6]);
        let f = build_family(&rhs(&[0, 1, 0])).unwrap();
        assert_eq!(f.evaluate(-2).unwrap().as_slice(), &[0, 1, -6]);
        let a = rhs(&[4, -7, 2, 9]);
        assert_eq!(build_family(&a).unwrap().evaluate(0).unwrap(), a.to_power_sum());
    }

    #[test]
    fn degree_profiles() {
        assert_eq!(
            build_family(&rhs(&[0, 1, 0])).unwrap().degree_profile().unwrap(),
            vec![0, 0, 1]
        );
        assert_eq!(
            build_family(&rhs(&[1, 0, 0, 0])).unwrap().degree_profile().unwrap(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(
            build_family(&rhs(&[0, 0, 0, 5])).unwrap().degree_profile().unwrap(),
            vec![0, 0, 0, 0]
        );
        assert_eq!(
            build_family(&RhsVector::zero(3)).unwrap().degree_profile(),
            Err(Error::ZeroRhs)
        );
    }

    #[test]
    fn shift_example() {
        let (x, y) = shift_solution(&[2], &[1], 1);
        assert_eq!((x.clone(), y.clone()), (vec![3], vec![2]));
        let diff = &power_sum_vector(&x, 2) - &power_sum_vector(&y, 2);
        let f = build_family(&rhs(&[1, 3])).unwrap();
        assert_eq!(diff, f.evaluate(1).unwrap());
        assert_eq!(diff.as_slice(), &[1, 5]);
        assert_eq!(shift_solution(&[4, -1], &[0, 2], 0), (vec![4, -1], vec![0, 2]));
    }

    #[test]
    fn homogeneous_family_is_zero() {
        let f = build_family(&RhsVector::zero(4)).unwrap();
        for h in -5..=5 {
            assert_eq!(f.evaluate(h).unwrap(), PowerSumVector::zero(4));
        }
    }

    #[test]
    fn random_degree_and_leading_coefficient_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let binom = pascal_rows(8).unwrap();
        for _ in 0..1000 {
            let k = rng.gen_range(1..=8usize);
            let mut a: Vec<i64> = (0..k).map(|_| rng.gen_range(-9..=9)).collect();
            if a.iter().all(|&v| v == 0) {
                a[rng.gen_range(0..k)] = rng.gen_range(1..=9);
            }
            let r = rhs(&a);
            let ell = r.ell().unwrap();
            let f = build_family(&r).unwrap();
            f.degree_profile().unwrap();
            for j in ell + 1..=k as u32 {
                assert_eq!(
                    f.coefficient(j, j - ell),
                    binom[j as usize][ell as usize] * a[ell as usize - 1] as i128
                );
            }
        }
    }

    #[test]
    fn large_degree_binomials_are_exact() {
        let rows = pascal_rows(60).unwrap();
        assert_eq!(rows[60][30], 118264581564861424);
        assert!(pascal_rows(200).is_err());
    }

    #[test]
    fn lemma_examples() {
        let budget = Budget::default();
        let shape = SystemShape::new(1, 1, 1).unwrap();
        let report = verify_lemma(shape, &rhs(&[1]), &budget).unwrap();
        assert_eq!(report.j, Count::from(2u32));
        assert_eq!(report.h, Count::from(12u32));
        assert!(report.holds);
        assert_eq!(report.ratio, Some(BigRational::from_integer(2.into())));

        let shape = SystemShape::new(1, 2, 1).unwrap();
        let report = verify_lemma(shape, &rhs(&[1, 0]), &budget).unwrap();
        assert!(report.j.is_zero());
        assert!(report.holds);
        assert_eq!(report.ratio, None);
    }
}
