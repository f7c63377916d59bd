//! Covering and packing estimates for sparse unit balls in the uniform
//! metric, the entropy budgets they are compared against, and the
//! multiscale transfer sum.

mod class;
mod estimate;

pub use class::{ClassSpec, Metric};
pub use estimate::{
    covering_upper, covering_upper_with, default_delta, packing_lower, packing_lower_with,
    write_estimates_csv, EntropyEstimate, DEFAULT_LATTICE_CAP,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function_space::{lp_norm, sup_norm, Dictionary, NormSpec, SparseFunction};
use crate::rng::seeded;

/// `C · log₂(2N) · (v/k)^{1/2}`.
pub fn entropy_budget_p2(k: usize, v: usize, n: usize, c: f64) -> f64 {
    c * (2.0 * n as f64).log2() * (v as f64 / k as f64).sqrt()
}

/// `C · log₂(2N)^{2/p} · (v/k)^{1/p}`.
pub fn entropy_budget_p(k: usize, v: usize, n: usize, p: f64, c: f64) -> f64 {
    c * (2.0 * n as f64).log2().powf(2.0 / p) * (v as f64 / k as f64).powf(1.0 / p)
}

/// `log₂(R / (4t))`; negative values are left for callers to clamp.
pub fn entropy_lower_log(t: f64, r: f64) -> f64 {
    (r / (4.0 * t)).log2()
}

/// Interpolation exponents for transferring entropy from `L_p` to `L_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub a: f64,
}

impl TransferParams {
    /// `θ = (½ − 1/q)/(1/p − 1/q)` and `a = 2^{θ/(1−θ)}`; `q` may be infinite.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&p) {
            return Err(invalid(format!("transfer needs p in [1, 2), got {p}")));
        }
        if !(q > 2.0) {
            return Err(invalid(format!("transfer needs q > 2, got {q}")));
        }
        let theta = (0.5 - 1.0 / q) / (1.0 / p - 1.0 / q);
        let a = 2f64.powf(theta / (1.0 - theta));
        Ok(TransferParams { p, q, theta, a })
    }
}

/// Value of the transfer sum with the scales it visited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSum {
    pub bits: f64,
    /// Arguments `2^{-3} a^{s-1} ε^θ` at which `H` was evaluated.
    pub scales: Vec<f64>,
    pub terms: Vec<f64>,
}

/// `∑_{s≥0} H(2^{-3} a^{s-1} ε^θ) + H(ε^θ)`, truncated once the scale
/// reaches `2R` where `H` vanishes.
pub fn transfer_rhs(
    epsilon: f64,
    params: &TransferParams,
    h: &dyn Fn(f64) -> f64,
    r_class: f64,
) -> Result<TransferSum> {
    if !(epsilon > 0.0 && r_class > 0.0) {
        return Err(invalid("epsilon and the class radius must be positive"));
    }
    let stop = 2.0 * r_class;
    let tail = h(stop);
    if tail > 0.0 {
        return Err(Error::NonterminatingSum {
            scale: stop,
            bits: tail,
        });
    }
    let base = epsilon.powf(params.theta);
    let mut scales = Vec::new();
    let mut terms = Vec::new();
    let mut scale = base / 8.0 / params.a;
    while scale < stop {
        scales.push(scale);
        terms.push(h(scale));
        scale *= params.a;
    }
    let bits = terms.iter().sum::<f64>() + h(base);
    Ok(TransferSum { bits, scales, terms })
}

/// Largest observed `‖f‖_∞ / ‖f‖_{log₂ N}` over seeded random members of `Σ_v`.
pub fn empirical_c0(dict: &Dictionary, v: usize, samples: usize, seed: u64) -> Result<f64> {
    let n = dict.len();
    if v == 0 || v > n {
        return Err(invalid(format!("sparsity v = {v} must lie in 1..={n}")));
    }
    let q = (n as f64).log2().max(1.0);
    let spec = NormSpec::with_grid(q, (8 * NormSpec::required_grid(dict, q)).max(512));
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut support = rand::seq::index::sample(&mut rng, n, v).into_vec();
        support.sort_unstable();
        let coeffs = (0..v).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = SparseFunction::new(dict, support, coeffs)?;
        let norm = lp_norm(&f, spec);
        if norm > 0.0 {
            worst = worst.max(sup_norm(&f).certified_upper / norm);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets() {
        assert!((entropy_budget_p2(4, 4, 256, 1.0) - 9.0).abs() < 1e-12);
        assert!((entropy_budget_p2(1, 1, 2, 1.0) - 2.0).abs() < 1e-12);
        assert!((entropy_budget_p(4, 4, 256, 1.0, 1.0) - 81.0).abs() < 1e-9);
        let a = entropy_budget_p(3, 3, 64, 1.0, 1.0);
        assert!((entropy_budget_p(12, 3, 64, 1.0, 1.0) - a / 4.0).abs() < 1e-12);
        assert_eq!(entropy_budget_p(5, 2, 9, 2.0, 1.3), entropy_budget_p2(5, 2, 9, 1.3));
    }

    #[test]
    fn lower_log() {
        assert_eq!(entropy_lower_log(0.125, 1.0), 1.0);
        assert_eq!(entropy_lower_log(0.25, 1.0), 0.0);
        assert_eq!(entropy_lower_log(0.5, 1.0), -1.0);
    }

    #[test]
    fn transfer_exponents() {
        let t = TransferParams::new(1.0, f64::INFINITY).unwrap();
        assert_eq!((t.theta, t.a), (0.5, 2.0));
        let t = TransferParams::new(1.5, f64::INFINITY).unwrap();
        assert!((t.theta - 0.75).abs() < 1e-15);
        assert!(TransferParams::new(2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn transfer_sum_examples() {
        let params = TransferParams::new(1.0, f64::INFINITY).unwrap();
        let zero = transfer_rhs(0.3, &params, &|_| 0.0, 1.0).unwrap();
        assert_eq!(zero.bits, 0.0);
        let step = |t: f64| if t < 1.0 { 1.0 } else { 0.0 };
        let s = transfer_rhs(1.0, &params, &step, 1.0).unwrap();
        assert_eq!(s.bits, 4.0);
        assert!(matches!(
            transfer_rhs(1.0, &params, &|_| 1.0, 1.0),
            Err(Error::NonterminatingSum { .. })
        ));
    }
}
