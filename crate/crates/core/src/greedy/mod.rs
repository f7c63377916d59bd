//! Greedy `m`-term approximation over the `L₂`-normalized dictionary
//! `ψ_j = φ_j / ‖φ_j‖₂`, and the rate formulas it is compared against.
//!
//! Targets are dense coefficient vectors in the `ψ` coordinates.

mod ogp;
mod wcga;

pub use ogp::Ogp;
pub use wcga::Wcga;

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::function_space::Dictionary;
use crate::registry::{parse_params, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Ogp,
    Wcga { t_weak: f64, p: f64 },
}

/// Residual norms `σ̂_0 ≥ σ̂_1 ≥ …` and the indices chosen at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub target: String,
    pub algorithm: AlgorithmSpec,
    pub residual_norms: Vec<f64>,
    pub selected_indices: Vec<usize>,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    target: &'a str,
    step: usize,
    selected_index: Option<usize>,
    residual_norm: f64,
}

impl GreedyTrace {
    /// One row per step; step 0 has no selected index.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (step, &r) in self.residual_norms.iter().enumerate() {
            let row = TraceRow {
                target: &self.target,
                step,
                selected_index: step.checked_sub(1).map(|i| self.selected_indices[i]),
                residual_norm: r,
            };
            w.serialize(row).map_err(|e| invalid(format!("CSV: {e}")))?;
        }
        w.flush().map_err(|e| invalid(format!("CSV: {e}")))?;
        Ok(())
    }
}

/// Smoothness data of `L_p`, `p ≥ 2`: power `s = 2` and `γ = (p − 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessSpec {
    pub p: f64,
    pub s: f64,
    pub gamma: f64,
}

impl SmoothnessSpec {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(invalid(format!("smoothness needs finite p ≥ 2, got {p}")));
        }
        Ok(SmoothnessSpec {
            p,
            s: 2.0,
            gamma: (p - 1.0) / 2.0,
        })
    }
}

pub trait GreedyAlgorithm: Send + Sync {
    fn spec(&self) -> AlgorithmSpec;

    /// Runs at most `m` steps on `target` (coefficients in `ψ` coordinates).
    fn run(&self, dict: &Dictionary, target: &[f64], m: usize, label: &str) -> Result<GreedyTrace>;
}

pub(crate) fn check_target(dict: &Dictionary, target: &[f64], m: usize) -> Result<()> {
    if target.len() != dict.len() {
        return Err(invalid(format!(
            "target has {} coefficients, dictionary has {}",
            target.len(),
            dict.len()
        )));
    }
    if m > dict.len() {
        return Err(invalid(format!("m = {m} exceeds N = {}", dict.len())));
    }
    Ok(())
}

/// Smallest unselected index whose score is at least `weak · max`.
pub(crate) fn weak_argmax(scores: &[f64], selected: &[bool], weak: f64) -> Option<(usize, f64)> {
    let best = scores
        .iter()
        .zip(selected)
        .filter(|(_, s)| !**s)
        .map(|(x, _)| x.abs())
        .fold(0.0, f64::max);
    scores
        .iter()
        .enumerate()
        .find(|(j, x)| !selected[*j] && x.abs() >= weak * best)
        .map(|(j, _)| (j, best))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct WcgaParams {
    p: f64,
    t_weak: f64,
}

impl Default for WcgaParams {
    fn default() -> Self {
        WcgaParams { p: 4.0, t_weak: 1.0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// Registered algorithms: `ogp`, `wcga`.
pub fn algorithms() -> Registry<dyn GreedyAlgorithm> {
    Registry::new("greedy algorithm")
        .register("ogp", |v: &Value| {
            let _: NoParams = parse_params(v)?;
            Ok(Box::new(Ogp) as Box<dyn GreedyAlgorithm>)
        })
        .register("wcga", |v: &Value| {
            let p: WcgaParams = parse_params(v)?;
            Ok(Box::new(Wcga::new(p.p, p.t_weak)?) as Box<dyn GreedyAlgorithm>)
        })
}

/// `R₁⁻¹ · v^{1/2} · √p · m^{−1/2}`.
pub fn sigma_budget_a1(m: usize, p: f64, v: usize, r1: f64) -> f64 {
    (v as f64).sqrt() * p.sqrt() / (r1 * (m as f64).sqrt())
}

/// `C · (log₂(2N/k) / k)^r`.
pub fn entropy_from_sigma(k: usize, n: usize, r: f64, c: f64) -> f64 {
    let k = k as f64;
    c * ((2.0 * n as f64 / k).log2() / k).powf(r)
}

/// Smallest `C` with `σ̂_m ≤ C √(p−1) m^{−1/2}` on every step of every trace.
pub fn fit_smoothness_constant(traces: &[GreedyTrace], p: f64) -> f64 {
    traces
        .iter()
        .flat_map(|t| t.residual_norms.iter().enumerate().skip(1))
        .map(|(m, r)| r * (m as f64).sqrt() / (p - 1.0).sqrt())
        .fold(0.0, f64::max)
}
