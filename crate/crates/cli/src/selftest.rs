//! Invariant checks over every shape with `s <= 2`, `k <= 3`, `X <= max_x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use vinocount::engine::{brute_force_histogram, Budget, HCounter, JCounter};
use vinocount::expsum::JDftVerifier;
use vinocount::expsum::default_j_grid;
use vinocount::model::power_sum_vector;
use vinocount::shift::{build_family, shift_solution};
use vinocount::{Count, PowerSumVector, Result, RhsVector, SystemShape};

#[derive(Debug, Default, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub instances: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, ..Default::default() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(what());
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub max_x: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn shapes(max_x: u64) -> impl Iterator<Item = SystemShape> {
    (1..=2).flat_map(move |s| {
        (1..=3).flat_map(move |k| (1..=max_x).map(move |x| SystemShape::new(s, k, x).unwrap()))
    })
}

/// Every `a` with `|a_j| <= 2sX^j`.
fn rhs_box(shape: SystemShape) -> Vec<RhsVector> {
    let radii: Vec<i64> = (1..=shape.k)
        .map(|j| 2 * shape.s as i64 * (shape.x as i64).pow(j))
        .collect();
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for r in radii {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(|a| RhsVector::new(a).unwrap()).collect()
}

fn tuples(x: i64, len: u32) -> Vec<Vec<i64>> {
    (0..len).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                (-x..=x).map(move |d| {
                    let mut t = t.clone();
                    t.push(d);
                    t
                })
            })
            .collect()
    })
}

pub fn run(max_x: u64, samples: usize, seed: u64, budget: &Budget) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = Check::new("count equals brute force");
    let mut lemma = Check::new("H >= (2X+1) J");
    let mut shift = Check::new("shifted solutions solve the shifted system");
    let mut degree = Check::new("degree law and leading coefficient");
    let mut dft = Check::new("grid quadrature equals J");

    for shape in shapes(max_x) {
        let jc = JCounter::new(shape, budget)?;
        let hc = HCounter::new(shape, budget)?;
        let hist = brute_force_histogram(shape, budget)?;
        let rhss = rhs_box(shape);
        let shifts = Count::from(2 * shape.x + 1);
        for a in &rhss {
            let j = jc.count(a)?;
            let key = PowerSumVector::from_slice(a.as_slice());
            let bf = Count::from(hist.get(&key).copied().unwrap_or(0));
            oracle.record(j == bf, || format!("{shape:?} a={a}: {j} vs {bf}"));
            let h = hc.count(a)?;
            lemma.record(h >= &shifts * &j, || format!("{shape:?} a={a}: H={h} J={j}"));
        }

        let x = shape.x as i64;
        let all = tuples(x, shape.s);
        for tx in &all {
            for ty in &all {
                let a = &power_sum_vector(tx, shape.k) - &power_sum_vector(ty, shape.k);
                let family = build_family(&RhsVector::new(a.as_slice().to_vec())?)?;
                for h in -x..=x {
                    let (sx, sy) = shift_solution(tx, ty, h);
                    let lhs = &power_sum_vector(&sx, shape.k) - &power_sum_vector(&sy, shape.k);
                    shift.record(lhs == family.evaluate(h)?, || format!("x={tx:?} y={ty:?} h={h}"));
                }
            }
        }

        if shape.k <= 2 && shape.x <= 2 {
            let verifier = JDftVerifier::new(shape, default_j_grid(shape, &RhsVector::zero(shape.k))?, budget)?;
            for _ in 0..8 {
                let a = &rhss[rng.gen_range(0..rhss.len())];
                let report = verifier.verify(a)?;
                dft.record(report.pass, || format!("{shape:?} a={a}: {}", report.quadrature));
            }
        }
    }

    for _ in 0..samples {
        let k = rng.gen_range(1..=8u32);
        let mut a: Vec<i64> = (0..k).map(|_| rng.gen_range(-9..=9)).collect();
        if a.iter().all(|&v| v == 0) {
            a[0] = 1;
        }
        let a = RhsVector::new(a)?;
        let ell = a.ell().unwrap_or(1);
        let family = build_family(&a)?;
        let law: Vec<u32> = (1..=k).map(|j| j.saturating_sub(ell)).collect();
        let lead_ok = (ell + 1..=k).all(|j| {
            family.leading_coefficient(j) == binomial(j, ell) * a.as_slice()[ell as usize - 1] as i128
        });
        degree.record(family.realized_degrees() == law && lead_ok, || format!("a={a}"));
    }

    let checks = vec![oracle, lemma, shift, degree, dft];
    let pass = checks.iter().all(|c| c.violations == 0);
    Ok(SelftestReport { seed, max_x, checks, pass })
}

fn binomial(n: u32, r: u32) -> i128 {
    (0..r).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}
