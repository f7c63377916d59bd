//! Point-count budgets: the Chernoff union condition, the multiscale
//! partition behind it, the entropy-integral requirement, and closed-form
//! budgets for comparison.
//!
//! Logarithms paired with exponentials are natural; displayed budget
//! formulas use base 2.

mod integral;
mod partition;

pub use integral::{adaptive_trapezoid, required_m_integral, required_m_integral_value};
pub use partition::{
    net_partition, LatticeNets, LevelNets, PartitionLevel, PartitionResult, PartitionSchedule,
};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::derive_seed;
use crate::sampling::sample_iid;

/// One level of a Chernoff family: `|F_j|` (stored as `ln |F_j|`), the sup
/// bound `M_j` and the deviation `η_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffLevel {
    pub ln_card: f64,
    pub m_sup: f64,
    pub eta: f64,
}

impl ChernoffLevel {
    pub fn new(card: u64, m_sup: f64, eta: f64) -> Result<Self> {
        if card == 0 {
            return Err(invalid("level cardinality must be at least 1"));
        }
        Self::from_ln_card((card as f64).ln(), m_sup, eta)
    }

    pub fn from_ln_card(ln_card: f64, m_sup: f64, eta: f64) -> Result<Self> {
        if !(ln_card >= 0.0) {
            return Err(invalid("level cardinality must be at least 1"));
        }
        if !(m_sup > 0.0) {
            return Err(invalid(format!("sup bound M = {m_sup} must be positive")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid(format!("deviation η = {eta} must lie in (0, 1)")));
        }
        Ok(ChernoffLevel { ln_card, m_sup, eta })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChernoffFamily {
    pub levels: Vec<ChernoffLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bl2Outcome {
    pub lhs: f64,
    pub holds: bool,
}

/// `2 ∑ |F_j| exp(−m η_j² / (8 M_j))` and whether it is below one.
pub fn bl2_condition(family: &ChernoffFamily, m: usize) -> Bl2Outcome {
    let lhs = 2.0
        * family
            .levels
            .iter()
            .map(|l| (l.ln_card - m as f64 * l.eta * l.eta / (8.0 * l.m_sup)).exp())
            .sum::<f64>();
    Bl2Outcome { lhs, holds: lhs < 1.0 }
}

/// Deviations `ε_j = 4 √M_j √(ln(λ L_j)) / √m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub eps: Vec<f64>,
    pub total: f64,
}

/// `(M_j, ln L_j)` pairs in, per-level deviations out.
pub fn epsilon_schedule(levels: &[(f64, f64)], lambda: f64, m: usize) -> Result<EpsilonSchedule> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let ln_lambda = lambda.ln();
    let eps = levels
        .iter()
        .map(|&(m_sup, ln_l)| {
            let log = ln_lambda + ln_l;
            if !(log > 0.0) {
                return Err(invalid(format!("λ·L_j = exp({log}) must exceed 1")));
            }
            Ok(4.0 * m_sup.sqrt() * log.sqrt() / (m as f64).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let total = eps.iter().sum();
    Ok(EpsilonSchedule { eps, total })
}

/// `⌈C_β K^β ε^{−2} log₂(2/ε) N^{β+1} log₂ N⌉`.
pub fn required_m_lemma41(n: usize, beta: f64, k: f64, epsilon: f64, c_beta: f64) -> Result<u64> {
    if !(k >= 2.0) || !(beta > 0.0) || !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(invalid("need K ≥ 2, β > 0 and ε in (0, 1/2]"));
    }
    let n = n as f64;
    let value = c_beta * k.powf(beta) * epsilon.powi(-2) * (2.0 / epsilon).log2() * n.powf(beta + 1.0) * n.log2();
    Ok(value.ceil() as u64)
}

/// Unit-constant budgets from the hyperbolic-cross results and the sparse
/// constructions, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetComparison {
    pub v: usize,
    pub n: usize,
    pub p: f64,
    pub n_hc: f64,
    pub d: usize,
    pub old_p1: f64,
    pub old_p2: f64,
    pub new: f64,
    pub p_gt2: Option<f64>,
}

/// `v² n^{9/2}`, `v² n`, `v log₂(2N)² log₂(2v)²` and, for `p > 2`,
/// `v^{p/2} log₂(2N)²`. The dimension `d` only enters the hidden constants.
pub fn compare_budgets(v: usize, n: usize, p: f64, n_hc: f64, d: usize) -> Result<BudgetComparison> {
    if v == 0 || n == 0 || !(p >= 1.0) || !(n_hc >= 1.0) || d == 0 {
        return Err(invalid("all budget arguments must be at least 1"));
    }
    let vf = v as f64;
    let ln = (2.0 * n as f64).log2();
    let lv = (2.0 * vf).log2();
    Ok(BudgetComparison {
        v,
        n,
        p,
        n_hc,
        d,
        old_p1: vf * vf * n_hc.powf(4.5),
        old_p2: vf * vf * n_hc,
        new: vf * ln * ln * lv * lv,
        p_gt2: (p > 2.0).then(|| vf.powf(p / 2.0) * ln * ln),
    })
}

pub fn write_budgets_csv<W: Write>(rows: &[BudgetComparison], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| invalid(format!("CSV: {e}")))?;
    }
    w.flush().map_err(|e| invalid(format!("CSV: {e}")))?;
    Ok(())
}

/// Constants appearing in the budget formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetParams {
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
    pub k: f64,
    pub beta: f64,
    pub c_beta: f64,
    pub c_p: f64,
    pub big_c_p: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams {
            b: 1.0,
            b1: 1.0,
            b2: 1.0,
            k: 2.0,
            beta: 1.0,
            c_beta: 1.0,
            c_p: 1.0,
            big_c_p: 1.0,
        }
    }
}

impl BudgetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 1.0 && self.b1 >= 1.0 && self.b2 >= 1.0) {
            return Err(invalid("B, B1 and B2 must be at least 1"));
        }
        if !(self.k >= 2.0) || !(self.beta > 0.0) {
            return Err(invalid("need K ≥ 2 and β > 0"));
        }
        if !(self.c_beta > 0.0 && self.c_p > 0.0 && self.big_c_p > 0.0) {
            return Err(invalid("multipliers must be positive"));
        }
        Ok(())
    }
}

/// `M · χ{cos(2πkx) ≥ τ}`: a bounded function with exactly known `L₁` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorFunction {
    pub frequency: usize,
    pub threshold: f64,
    pub height: f64,
}

impl IndicatorFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let c = (2.0 * std::f64::consts::PI * self.frequency as f64 * x).cos();
        if c >= self.threshold {
            self.height
        } else {
            0.0
        }
    }

    /// `M · arccos(τ) / π`.
    pub fn l1(&self) -> f64 {
        self.height * self.threshold.clamp(-1.0, 1.0).acos() / std::f64::consts::PI
    }
}

/// A Chernoff family of indicator functions with its deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorLevel {
    pub functions: Vec<IndicatorFunction>,
    pub eta: f64,
}

impl IndicatorLevel {
    pub fn chernoff(&self) -> Result<ChernoffLevel> {
        let m_sup = self.functions.iter().map(|f| f.height.abs()).fold(0.0, f64::max);
        ChernoffLevel::new(self.functions.len() as u64, m_sup, self.eta)
    }
}

/// Fraction of seeded iid point sets of size `m` on which every function of
/// every level has `|‖g‖₁ − (1/m)∑|g(ξ)|| ≤ η_j`.
pub fn bl2_success_fraction(levels: &[IndicatorLevel], m: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("at least one trial is needed"));
    }
    let ok = (0..trials)
        .into_par_iter()
        .map(|t| {
            let pts = sample_iid(m, derive_seed(seed, t as u64))?;
            Ok(levels.iter().all(|level| {
                level.functions.iter().all(|g| {
                    let mean = pts.nodes().iter().map(|&x| g.eval(x).abs()).sum::<f64>() / m as f64;
                    (g.l1() - mean).abs() <= level.eta
                })
            }))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ok.iter().filter(|b| **b).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bl2_examples() {
        let fam = ChernoffFamily {
            levels: vec![ChernoffLevel::new(1, 1.0, 0.5).unwrap()],
        };
        let a = bl2_condition(&fam, 64);
        assert!((a.lhs - 2.0 * (-2.0f64).exp()).abs() < 1e-15 && a.holds);
        let b = bl2_condition(&fam, 8);
        assert!((b.lhs - 2.0 * (-0.25f64).exp()).abs() < 1e-15 && !b.holds);
        let empty = bl2_condition(&ChernoffFamily::default(), 5);
        assert_eq!((empty.lhs, empty.holds), (0.0, true));
        assert!(ChernoffLevel::new(0, 1.0, 0.5).is_err());
        assert!(ChernoffLevel::new(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        let s = epsilon_schedule(&[(1.0, 0.0)], std::f64::consts::E, 16).unwrap();
        assert!((s.eps[0] - 1.0).abs() < 1e-15);
        let a = epsilon_schedule(&[(2.0, 1.0), (0.5, 3.0)], 8.0, 10).unwrap();
        let b = epsilon_schedule(&[(2.0, 1.0), (0.5, 3.0)], 8.0, 40).unwrap();
        for (x, y) in a.eps.iter().zip(&b.eps) {
            assert!((x / 2.0 - y).abs() < 1e-15);
        }
        let tiny = epsilon_schedule(&[(1.0, 0.0)], 1.0 + 1e-12, 1).unwrap();
        assert!(tiny.eps[0] < 1e-5);
        assert!(epsilon_schedule(&[(1.0, 0.0)], 1.0, 1).is_err());
    }

    #[test]
    fn lemma41_plug_in() {
        assert_eq!(required_m_lemma41(8, 1.0, 2.0, 0.5, 1.0).unwrap(), 3072);
        let a = required_m_lemma41(64, 1.0, 2.0, 0.25, 1.0).unwrap() as f64;
        let b = required_m_lemma41(64, 1.0, 2.0, 0.125, 1.0).unwrap() as f64;
        assert!((b / a - 4.0 * (1.0 + 1.0 / 3.0)).abs() < 1e-3);
        assert!(required_m_lemma41(8, 1.0, 1.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn comparison_plug_in() {
        let c = compare_budgets(16, 1024, 2.0, 10.0, 2).unwrap();
        assert!((c.new - 48400.0).abs() < 1e-9);
        assert!((c.old_p2 - 2560.0).abs() < 1e-12);
        assert_eq!(c.p_gt2, None);
        let one = compare_budgets(1, 1024, 2.0, 10.0, 2).unwrap();
        assert!((one.new - 121.0).abs() < 1e-9);
        let hi = compare_budgets(4, 8, 4.0, 2.0, 1).unwrap();
        assert!((hi.p_gt2.unwrap() - 16.0 * 16.0).abs() < 1e-9);
    }

    #[test]
    fn indicator_norms() {
        let g = IndicatorFunction {
            frequency: 3,
            threshold: 0.0,
            height: 2.0,
        };
        assert!((g.l1() - 1.0).abs() < 1e-15);
        let n = 1 << 16;
        let mean = (0..n).map(|i| g.eval((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 1e-3);
    }
}
