use serde::{Deserialize, Serialize};

use crate::budget::{epsilon_schedule, ChernoffFamily, ChernoffLevel, EpsilonSchedule};
use crate::entropy::ClassSpec;
use crate::error::{invalid, Error, Result};
use crate::function_space::{sup_norm_with, SparseFunction};

/// Level `j` of the multiscale partition with `M_j = (1+a)^{pj}` and
/// `ln L_j = ∑_{k≥j} ln |A_k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionLevel {
    pub j: i64,
    pub m_sup: f64,
    pub ln_l: f64,
}

/// Geometric levels `(1+a)^j`, `j₀ < j ≤ J`, with `a = c_* ε`,
/// `(1+a)^{J−1} ≤ R < (1+a)^J` and `(1+a)^{j₀p} ≤ ε/5 < (1+a)^{(j₀+1)p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSchedule {
    pub epsilon: f64,
    pub p: f64,
    pub c_star: f64,
    pub a: f64,
    pub r: f64,
    pub j0: i64,
    pub j_top: i64,
    pub lambda: f64,
    pub levels: Vec<PartitionLevel>,
}

impl PartitionSchedule {
    pub const DEFAULT_C_STAR: f64 = 0.01;
    pub const DEFAULT_LAMBDA: f64 = 8.0;

    pub fn new(epsilon: f64, p: f64, r: f64, c_star: f64, lambda: f64, nets: &dyn LevelNets) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("ε = {epsilon} must lie in (0, 1)")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid(format!("exponent p = {p} must be finite and at least 1")));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(invalid(format!("class sup bound R = {r} must be at least 1")));
        }
        if !(c_star > 0.0 && c_star < 1.0) || !(lambda > 1.0) {
            return Err(invalid("need c_* in (0, 1) and λ > 1"));
        }
        let a = c_star * epsilon;
        let step = a.ln_1p();
        let j_top = (r.ln() / step).floor() as i64 + 1;
        let j0 = ((epsilon / 5.0).ln() / (p * step)).floor() as i64;
        let mut ln_l = 0.0;
        let mut levels: Vec<PartitionLevel> = ((j0 + 1)..=j_top)
            .rev()
            .map(|j| {
                ln_l += nets.ln_size(a * (1.0 + a).powi(j as i32));
                PartitionLevel {
                    j,
                    m_sup: (1.0 + a).powf(p * j as f64),
                    ln_l,
                }
            })
            .collect();
        levels.reverse();
        Ok(PartitionSchedule {
            epsilon,
            p,
            c_star,
            a,
            r,
            j0,
            j_top,
            lambda,
            levels,
        })
    }

    /// `(1+a)^j`.
    pub fn height(&self, j: i64) -> f64 {
        (1.0 + self.a).powi(j as i32)
    }

    /// Net radius `a(1+a)^j` at level `j`.
    pub fn radius(&self, j: i64) -> f64 {
        self.a * self.height(j)
    }

    pub fn epsilons(&self, m: usize) -> Result<EpsilonSchedule> {
        let pairs: Vec<(f64, f64)> = self.levels.iter().map(|l| (l.m_sup, l.ln_l)).collect();
        epsilon_schedule(&pairs, self.lambda, m)
    }

    /// `∑ ε_j ≤ ε/4`.
    pub fn feasible(&self, m: usize) -> Result<bool> {
        Ok(self.epsilons(m)?.total <= self.epsilon / 4.0)
    }

    /// Smallest `m` at which the schedule is feasible:
    /// `(16 ∑ √(M_j ln(λL_j)) / ε)²`.
    pub fn threshold_m(&self) -> f64 {
        let ln_lambda = self.lambda.ln();
        let s: f64 = self
            .levels
            .iter()
            .map(|l| (l.m_sup * (ln_lambda + l.ln_l)).sqrt())
            .sum();
        (16.0 * s / self.epsilon).powi(2)
    }

    /// The family of differences `A_j f − A_{j−1} f` with `|F_j| = L_j`,
    /// sup bound `M_j` and deviation `η_j = ε_j`.
    pub fn chernoff_family(&self, m: usize) -> Result<ChernoffFamily> {
        let eps = self.epsilons(m)?;
        let levels = self
            .levels
            .iter()
            .zip(&eps.eps)
            .map(|(l, &e)| ChernoffLevel::from_ln_card(l.ln_l, l.m_sup, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChernoffFamily { levels })
    }

    /// Constants `(c_p, C_p)` with which the integral budget dominates the
    /// feasibility threshold, up to the Riemann-sum error of replacing the
    /// level sums by integrals: `c_p = c_*`, `C_p = 256 ln 2 / c_*³`.
    pub fn integral_constants(c_star: f64) -> (f64, f64) {
        (c_star, 256.0 * std::f64::consts::LN_2 / c_star.powi(3))
    }
}

/// A family of sup-metric nets indexed by radius.
pub trait LevelNets: Sync {
    /// `ln |A|` for the net of radius `radius`.
    fn ln_size(&self, radius: f64) -> f64;

    /// Coefficients, on `f`'s support, of a net element within `radius` of `f`.
    fn approximate(&self, f: &SparseFunction<'_>, radius: f64) -> Vec<f64>;
}

/// Coefficient lattices of spacing `radius / v` clipped to the class's
/// coordinate box. Every element is bounded by 1, so rounding moves a
/// function by at most `radius` in the uniform norm.
#[derive(Debug, Clone)]
pub struct LatticeNets {
    v: usize,
    coordinate_bound: f64,
    ln_supports: f64,
    sup_bound: f64,
}

impl LatticeNets {
    pub fn new(class: &ClassSpec<'_>) -> Result<Self> {
        class.validate()?;
        let supports = class.supports();
        let coordinate_bound = supports
            .iter()
            .flat_map(|s| class.coordinate_bounds(s))
            .fold(0.0, f64::max);
        let ln_supports = (supports.len() as f64).ln();
        Ok(LatticeNets {
            v: class.v,
            coordinate_bound,
            ln_supports,
            sup_bound: class.sup_bound(),
        })
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    fn steps(&self, radius: f64) -> (f64, f64) {
        let s = radius / self.v as f64;
        (s, (self.coordinate_bound / s).floor())
    }

    /// Net entropy in bits, `log₂ |A|`, as a function of the radius.
    pub fn bits(&self, radius: f64) -> f64 {
        self.ln_size(radius) / std::f64::consts::LN_2
    }
}

impl LevelNets for LatticeNets {
    fn ln_size(&self, radius: f64) -> f64 {
        if radius >= self.sup_bound {
            return 0.0;
        }
        let (_, k) = self.steps(radius);
        if k == 0.0 {
            return 0.0;
        }
        self.ln_supports + self.v as f64 * (2.0 * k + 1.0).ln()
    }

    fn approximate(&self, f: &SparseFunction<'_>, radius: f64) -> Vec<f64> {
        if radius >= self.sup_bound {
            return vec![0.0; f.sparsity()];
        }
        let (s, k) = self.steps(radius);
        f.coeffs().iter().map(|&c| (c / s).round().clamp(-k, k) * s).collect()
    }
}

/// Level map and heights of `h(f, ·)` on the nodes, with the largest
/// observed `||f|^p − h^p|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub levels: Vec<i64>,
    pub h: Vec<f64>,
    pub max_violation: f64,
}

/// Assigns each node the highest `j` with `|A_j f(x)| ≥ (1+a)^{j−1}`, or `j₀`
/// when there is none, and sets `h = (1+a)^j` (zero on the `j₀` region).
pub fn net_partition(
    f: &SparseFunction<'_>,
    nets: &dyn LevelNets,
    schedule: &PartitionSchedule,
    nodes: &[f64],
) -> Result<PartitionResult> {
    let sup = sup_norm_with(f, 4096.max(64 * f.dictionary().max_frequency())).certified_upper;
    let dict = f.dictionary();
    let first = schedule.j0 + 1;
    let count = schedule.levels.len();
    let mut approx = Vec::with_capacity(count);
    for j in first..=schedule.j_top {
        let radius = schedule.radius(j);
        let coeffs = nets.approximate(f, radius);
        let distance = if coeffs.iter().all(|&c| c == 0.0) {
            sup.min(f.coeff_l1())
        } else {
            f.coeffs().iter().zip(&coeffs).map(|(a, b)| (a - b).abs()).sum()
        };
        if distance > radius * (1.0 + 1e-12) {
            return Err(Error::NetDeficient { level: j, radius });
        }
        approx.push(coeffs);
    }

    let step = schedule.a.ln_1p();
    let start = ((sup + schedule.radius(schedule.j_top)).ln() / step).floor() as i64 + 1;
    let start = start.min(schedule.j_top);
    let p = schedule.p;
    let mut levels = Vec::with_capacity(nodes.len());
    let mut h = Vec::with_capacity(nodes.len());
    let mut max_violation: f64 = 0.0;
    for &x in nodes {
        let basis: Vec<f64> = f.support().iter().map(|&j| dict.eval(j, x)).collect();
        let mut level = schedule.j0;
        let mut j = start;
        while j >= first {
            let c = &approx[(j - first) as usize];
            let value: f64 = c.iter().zip(&basis).map(|(a, b)| a * b).sum();
            if value.abs() >= schedule.height(j - 1) {
                level = j;
                break;
            }
            j -= 1;
        }
        let hx = if level == schedule.j0 { 0.0 } else { schedule.height(level) };
        let fx = f.evaluate(x).abs();
        max_violation = max_violation.max((fx.powf(p) - hx.powf(p)).abs());
        levels.push(level);
        h.push(hx);
    }
    Ok(PartitionResult {
        levels,
        h,
        max_violation,
    })
}
