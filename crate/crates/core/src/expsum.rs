//! Exponential sums along the moment curve and discrete orthogonality
//! checks.
//!
//! For integer vectors `d` with `|d_j| < M_j`, the average of
//! `e(m_1 d_1 / M_1 + … + m_k d_k / M_k)` over the grid
//! `0 <= m_j < M_j` is 1 when `d = 0` and 0 otherwise. Averaging
//! `|f_k(α;X)|^{2s}·e(−α·a)` over a grid fine enough for every phase
//! difference therefore reproduces `J_{s,k}(X;a)` exactly, up to rounding.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::count::Count;
use crate::engine::{Budget, HCounter, JCounter};
use crate::error::{Error, Result};
use crate::model::{IntSet, RhsVector, SystemShape};
use crate::shift::ShiftPolynomialFamily;

/// Relative tolerance for agreement between quadrature and exact counts.
pub const DFT_TOLERANCE: f64 = 1e-6;

/// `e(θ) = exp(2πiθ)`.
pub fn e(theta: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * theta).sin_cos();
    Complex64::new(c, s)
}

/// A point of `𝕋^k`, components in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(alpha: Vec<f64>) -> Self {
        TorusPoint(alpha.into_iter().map(frac).collect())
    }

    pub fn zero(k: u32) -> Self {
        TorusPoint(vec![0.0; k as usize])
    }

    /// `(m_1/M_1, …, m_k/M_k)`.
    pub fn from_grid(grid: &GridSpec, m: &[u64]) -> Self {
        TorusPoint::new(
            m.iter()
                .zip(grid.moduli())
                .map(|(&mj, &modulus)| mj as f64 / modulus as f64)
                .collect(),
        )
    }

    pub fn k(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        TorusPoint::new(self.0.iter().map(|v| -v).collect())
    }

    /// `α · c` reduced mod 1, one coordinate at a time.
    fn phase(&self, c: &[f64]) -> f64 {
        let mut theta = 0.0;
        for (a, v) in self.0.iter().zip(c) {
            theta += frac(a * v);
        }
        theta
    }
}

fn frac(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Moduli `M_1, …, M_k` of the grid `{(m_1/M_1, …, m_k/M_k)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GridSpec(Vec<u64>);

impl GridSpec {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::Invalid(format!("grid moduli must be positive: {moduli:?}")));
        }
        Ok(GridSpec(moduli))
    }

    pub fn moduli(&self) -> &[u64] {
        &self.0
    }

    pub fn k(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn points(&self) -> u128 {
        self.0
            .iter()
            .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
            .unwrap_or(u128::MAX)
    }

    /// Checks `M_j > reach_j` for every `j`, which makes orthogonality
    /// exact for phase differences with `|d_j| <= reach_j`.
    fn require_reach(&self, reach: &[u128]) -> Result<()> {
        for (j, (&m, &r)) in self.0.iter().zip(reach).enumerate() {
            if (m as u128) <= r {
                return Err(Error::Invalid(format!(
                    "grid modulus M_{} = {m} must exceed {r} for exact orthogonality",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Weights `c_x` for `|x| <= X`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    radius: u64,
    values: Vec<Complex64>,
}

impl WeightSequence {
    pub fn new(radius: u64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() as u64 != 2 * radius + 1 {
            return Err(Error::Invalid(format!(
                "{} weights given, need 2X+1 = {}",
                values.len(),
                2 * radius + 1
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Invalid("weights must be finite".into()));
        }
        Ok(WeightSequence { radius, values })
    }

    pub fn from_reals(radius: u64, values: Vec<f64>) -> Result<Self> {
        Self::new(radius, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// `c_x = 1` on the whole box.
    pub fn unit(radius: u64) -> Self {
        WeightSequence {
            radius,
            values: vec![Complex64::new(1.0, 0.0); 2 * radius as usize + 1],
        }
    }

    /// Indicator of `set ∩ [−X, X]`.
    pub fn indicator(radius: u64, set: &IntSet) -> Self {
        let r = radius as i64;
        WeightSequence {
            radius,
            values: (-r..=r)
                .map(|x| Complex64::new(if set.contains(x) { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        }
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn get(&self, x: i64) -> Complex64 {
        let idx = x + self.radius as i64;
        if idx < 0 || idx as usize >= self.values.len() {
            return Complex64::new(0.0, 0.0);
        }
        self.values[idx as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let r = self.radius as i64;
        (-r..=r).zip(self.values.iter().copied())
    }

    pub fn support(&self) -> IntSet {
        self.iter().filter(|(_, c)| c.norm_sqr() > 0.0).map(|(x, _)| x).collect()
    }

    /// The weights as nonnegative reals; complex or negative weights are
    /// refused.
    pub fn nonnegative_reals(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|c| {
                if c.im != 0.0 || c.re < 0.0 {
                    Err(Error::Invalid(format!(
                        "only nonnegative real weights are supported, got {c}"
                    )))
                } else {
                    Ok(c.re)
                }
            })
            .collect()
    }
}

fn moment_curve(x: i64, k: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(k as usize);
    let mut p = 1.0f64;
    for _ in 0..k {
        p *= x as f64;
        out.push(p);
    }
    out
}

/// `f_k(α;X) = Σ_{|x|<=X} e(α_1 x + … + α_k x^k)`.
pub fn eval_f(alpha: &TorusPoint, x: u64, k: u32) -> Complex64 {
    eval_e(alpha, &WeightSequence::unit(x), k)
}

/// `g_k(α;X) = Σ_{|h|<=X} e(α_1 p_1(h) + … + α_k p_k(h))`.
pub fn eval_g(alpha: &TorusPoint, x: u64, family: &ShiftPolynomialFamily) -> Result<Complex64> {
    let r = x as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for h in -r..=r {
        let c: Vec<f64> = (1..=family.k())
            .map(|j| family.evaluate_row(j, h).map(|v| v as f64))
            .collect::<Result<_>>()?;
        acc += e(alpha.phase(&c));
    }
    Ok(acc)
}

/// `E_X c(α) = Σ_{|x|<=X} c_x e(α_1 x + … + α_k x^k)`.
pub fn eval_e(alpha: &TorusPoint, weights: &WeightSequence, k: u32) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, c) in weights.iter() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        acc += c * e(alpha.phase(&moment_curve(x, k)));
    }
    acc
}

/// Exponential sum with integer frequencies, evaluated exactly on grid
/// points through per-axis root-of-unity tables.
struct GridSum<'a> {
    grid: &'a GridSpec,
    roots: Vec<Vec<Complex64>>,
    /// Frequencies reduced mod `M_j`, one row per term.
    terms: Vec<(Vec<u64>, Complex64)>,
}

impl<'a> GridSum<'a> {
    fn new(grid: &'a GridSpec) -> Self {
        let roots = grid
            .moduli()
            .iter()
            .map(|&m| (0..m).map(|r| e(r as f64 / m as f64)).collect())
            .collect();
        GridSum {
            grid,
            roots,
            terms: Vec::new(),
        }
    }

    fn push(&mut self, freq: &[i128], weight: Complex64) {
        let residues = freq
            .iter()
            .zip(self.grid.moduli())
            .map(|(&c, &m)| c.rem_euclid(m as i128) as u64)
            .collect();
        self.terms.push((residues, weight));
    }

    fn at(&self, m: &[u64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (res, w) in &self.terms {
            let mut z = *w;
            for (j, (&mj, &r)) in m.iter().zip(res).enumerate() {
                let modulus = self.grid.0[j];
                z *= self.roots[j][((mj as u128 * r as u128) % modulus as u128) as usize];
            }
            acc += z;
        }
        acc
    }
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums `f(m)` over the grid. Rows of the first axis are summed in
/// parallel and merged in row order, so the result does not depend on the
/// number of workers.
fn grid_sum<F: Fn(&[u64], usize) -> f64 + Sync>(grid: &GridSpec, f: F) -> f64 {
    let moduli = grid.moduli();
    let row_len: usize = moduli[1..].iter().map(|&m| m as usize).product();
    let rows: Vec<f64> = (0..moduli[0])
        .into_par_iter()
        .map(|m0| {
            let mut acc = Compensated::default();
            let mut m = vec![0u64; moduli.len()];
            m[0] = m0;
            for idx in 0..row_len {
                acc.add(f(&m, m0 as usize * row_len + idx));
                for j in (1..moduli.len()).rev() {
                    m[j] += 1;
                    if m[j] < moduli[j] {
                        break;
                    }
                    m[j] = 0;
                }
            }
            acc.value()
        })
        .collect();
    let mut total = Compensated::default();
    for r in rows {
        total.add(r);
    }
    total.value()
}

/// Values of `|f_k(α;radius)|^{2s}` at every grid point, row-major.
fn moment_grid(grid: &GridSpec, radius: u64, s: u32, k: u32) -> Vec<f64> {
    let mut sum = GridSum::new(grid);
    let r = radius as i64;
    for x in -r..=r {
        let freq: Vec<i128> = (1..=k).map(|j| (x as i128).pow(j)).collect();
        sum.push(&freq, Complex64::new(1.0, 0.0));
    }
    let moduli = grid.moduli();
    let total = grid.points() as usize;
    let row_len: usize = moduli[1..].iter().map(|&m| m as usize).product();
    let mut out = vec![0.0; total];
    out.par_chunks_mut(row_len.max(1))
        .enumerate()
        .for_each(|(m0, row)| {
            let mut m = vec![0u64; moduli.len()];
            m[0] = m0 as u64;
            for slot in row.iter_mut() {
                *slot = sum.at(&m).norm_sqr().powi(s as i32);
                for j in (1..moduli.len()).rev() {
                    m[j] += 1;
                    if m[j] < moduli[j] {
                        break;
                    }
                    m[j] = 0;
                }
            }
        });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DftReport {
    pub identity: &'static str,
    pub grid: GridSpec,
    pub quadrature: f64,
    pub exact: Count,
    pub abs_error: f64,
    pub pass: bool,
}

impl DftReport {
    fn new(identity: &'static str, grid: GridSpec, quadrature: f64, exact: Count) -> Self {
        let exact_f = exact.to_f64();
        let abs_error = (quadrature - exact_f).abs();
        DftReport {
            identity,
            grid,
            quadrature,
            pass: abs_error <= DFT_TOLERANCE * exact_f.max(1.0),
            exact,
            abs_error,
        }
    }
}

fn pow_u128(base: u64, exp: u32) -> u128 {
    (base as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

/// `2s·X^j`, the largest `|Σ_i (x_i^j − y_i^j)|` over the box.
fn power_sum_reach(s: u32, x: u64, j: u32) -> u128 {
    pow_u128(x, j).saturating_mul(2 * s as u128)
}

/// Default grid for the `J` identity: `M_j = 2sX^j + max(2sX^j, |a_j|) + 1`,
/// which is `4sX^j + 1` whenever `a` is in range.
pub fn default_j_grid(shape: SystemShape, a: &RhsVector) -> Result<GridSpec> {
    let moduli = (1..=shape.k)
        .map(|j| {
            let reach = power_sum_reach(shape.s, shape.x, j);
            let aj = a.as_slice()[j as usize - 1].unsigned_abs() as u128;
            u64::try_from(reach + reach.max(aj) + 1).map_err(|_| Error::Overflow("grid moduli"))
        })
        .collect::<Result<_>>()?;
    GridSpec::new(moduli)
}

/// Default grid for the `H` identity: `M_j = 4s(2X)^j + max_{|h|<=X} |p_j(h)| + 1`.
pub fn default_h_grid(shape: SystemShape, family: &ShiftPolynomialFamily) -> Result<GridSpec> {
    let moduli = (1..=shape.k)
        .map(|j| {
            let reach = power_sum_reach(shape.s, 2 * shape.x, j);
            let shift = family.max_abs_on(j, shape.x)?;
            u64::try_from(2 * reach + shift + 1).map_err(|_| Error::Overflow("grid moduli"))
        })
        .collect::<Result<_>>()?;
    GridSpec::new(moduli)
}

/// Precomputed `|f_k(α;X)|^{2s}` on a grid, for checking many right-hand
/// sides against `J_{s,k}(X;a)`.
pub struct JDftVerifier {
    shape: SystemShape,
    grid: GridSpec,
    moments: Vec<f64>,
    counter: JCounter,
}

impl JDftVerifier {
    pub fn new(shape: SystemShape, grid: GridSpec, budget: &Budget) -> Result<Self> {
        if grid.k() != shape.k {
            return Err(Error::Invalid("grid dimension must equal k".into()));
        }
        budget.check("grid points", grid.points(), budget.grid_points)?;
        let moments = moment_grid(&grid, shape.x, shape.s, shape.k);
        let counter = JCounter::new(shape, budget)?;
        Ok(JDftVerifier {
            shape,
            grid,
            moments,
            counter,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Grid average of `|f_k(α;X)|^{2s}·e(−α·a)` (real part).
    pub fn quadrature(&self, a: &RhsVector) -> Result<f64> {
        a.check_degree(self.shape.k)?;
        let reach: Vec<u128> = (1..=self.shape.k)
            .map(|j| {
                power_sum_reach(self.shape.s, self.shape.x, j)
                    + a.as_slice()[j as usize - 1].unsigned_abs() as u128
            })
            .collect();
        self.grid.require_reach(&reach)?;
        let mut phase = GridSum::new(&self.grid);
        let freq: Vec<i128> = a.as_slice().iter().map(|&v| -(v as i128)).collect();
        phase.push(&freq, Complex64::new(1.0, 0.0));
        let total = grid_sum(&self.grid, |m, idx| self.moments[idx] * phase.at(m).re);
        Ok(total / self.grid.points() as f64)
    }

    pub fn verify(&self, a: &RhsVector) -> Result<DftReport> {
        let quadrature = self.quadrature(a)?;
        let exact = self.counter.count(a)?;
        Ok(DftReport::new("J-dft", self.grid.clone(), quadrature, exact))
    }
}

/// Precomputed `|f_k(α;2X)|^{2s}` on a grid, for checking many right-hand
/// sides against `H_{s,k}(X;a)`.
pub struct HDftVerifier {
    shape: SystemShape,
    grid: GridSpec,
    moments: Vec<f64>,
    counter: HCounter,
}

impl HDftVerifier {
    pub fn new(shape: SystemShape, grid: GridSpec, budget: &Budget) -> Result<Self> {
        if grid.k() != shape.k {
            return Err(Error::Invalid("grid dimension must equal k".into()));
        }
        budget.check("grid points", grid.points(), budget.grid_points)?;
        let moments = moment_grid(&grid, 2 * shape.x, shape.s, shape.k);
        let counter = HCounter::new(shape, budget)?;
        Ok(HDftVerifier {
            shape,
            grid,
            moments,
            counter,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Grid average of `|f_k(α;2X)|^{2s}·g_k(−α;X)` (real part).
    pub fn quadrature(&self, a: &RhsVector) -> Result<f64> {
        a.check_degree(self.shape.k)?;
        let family = ShiftPolynomialFamily::new(a)?;
        let reach: Vec<u128> = (1..=self.shape.k)
            .map(|j| {
                Ok(power_sum_reach(self.shape.s, 2 * self.shape.x, j)
                    + family.max_abs_on(j, self.shape.x)?)
            })
            .collect::<Result<_>>()?;
        self.grid.require_reach(&reach)?;
        let mut g = GridSum::new(&self.grid);
        let r = self.shape.x as i64;
        for h in -r..=r {
            let freq: Vec<i128> = (1..=self.shape.k)
                .map(|j| family.evaluate_row(j, h).map(|v| -v))
                .collect::<Result<_>>()?;
            g.push(&freq, Complex64::new(1.0, 0.0));
        }
        let total = grid_sum(&self.grid, |m, idx| self.moments[idx] * g.at(m).re);
        Ok(total / self.grid.points() as f64)
    }

    pub fn verify(&self, a: &RhsVector) -> Result<DftReport> {
        let quadrature = self.quadrature(a)?;
        let exact = self.counter.count(a)?;
        Ok(DftReport::new("H-dft", self.grid.clone(), quadrature, exact))
    }
}

/// Checks `J_{s,k}(X;a)` against the grid average of `|f|^{2s}·e(−α·a)`.
pub fn verify_j_via_dft(shape: SystemShape, a: &RhsVector, grid: Option<GridSpec>, budget: &Budget) -> Result<DftReport> {
    a.check_degree(shape.k)?;
    let grid = match grid {
        Some(g) => g,
        None => default_j_grid(shape, a)?,
    };
    JDftVerifier::new(shape, grid, budget)?.verify(a)
}

/// Checks `H_{s,k}(X;a)` against the grid average of
/// `|f_k(α;2X)|^{2s}·g_k(−α;X)`.
pub fn verify_h_via_dft(shape: SystemShape, a: &RhsVector, grid: Option<GridSpec>, budget: &Budget) -> Result<DftReport> {
    a.check_degree(shape.k)?;
    let grid = match grid {
        Some(g) => g,
        None => default_h_grid(shape, &ShiftPolynomialFamily::new(a)?)?,
    };
    HDftVerifier::new(shape, grid, budget)?.verify(a)
}
