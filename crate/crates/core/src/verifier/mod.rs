//! Worst-case discretization ratios of a point set over every `v`-sparse
//! support of a dictionary.
//!
//! For `p = 2` each support reduces to a generalized eigenproblem and the
//! extremes are exact. Other exponents use a seeded local search whose
//! maxima are lower bounds and minima upper bounds on the true extremes.

mod scorer;

use itertools::Itertools;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function_space::{
    grid_mean_pow, lacunary_function, lp_norm, sup_norm, Dictionary, NormSpec, SparseFunction,
};
use crate::rng::seeded;
use crate::sampling::{discrete_mean_pow, PointSet};
use scorer::{empirical_gram, pencil_extremes, ExactP2Scorer, HeuristicScorer, SupportScorer};
pub(crate) use scorer::SupportExtremes;

/// Default cap on the number of supports enumerated exhaustively.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMode {
    ExactEnumeration,
    HeuristicSearch,
}

/// A support and coefficient vector attaining a reported extreme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub support: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub ratio: f64,
}

impl Witness {
    pub fn function<'d>(&self, dict: &'d Dictionary) -> Result<SparseFunction<'d>> {
        SparseFunction::new(dict, self.support.clone(), self.coeffs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationReport {
    pub p: f64,
    pub v: usize,
    pub epsilon: f64,
    pub m: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub pass: bool,
    pub mode: VerificationMode,
    /// True only when `r_min` and `r_max` are the exact extremes.
    pub certified: bool,
    pub supports_checked: u64,
    pub supports_total: u128,
    /// Quadrature resolution of the continuous norm; `None` when exact.
    pub grid_size: Option<usize>,
    pub witness_min: Witness,
    pub witness_max: Witness,
}

impl DiscretizationReport {
    /// Re-evaluates the pass flag against another tolerance.
    pub fn passes(&self, epsilon: f64) -> bool {
        self.r_min >= 1.0 - epsilon && self.r_max <= 1.0 + epsilon
    }

    /// `[lower, upper]` targets, e.g. `[4/5, 6/5]`.
    pub fn within(&self, lower: f64, upper: f64) -> bool {
        self.r_min >= lower && self.r_max <= upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportSampling {
    pub count: usize,
    pub seed: u64,
    /// Sample even when exhaustive enumeration would fit under the cap.
    #[serde(default)]
    pub always: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicConfig {
    #[serde(default = "HeuristicConfig::default_restarts")]
    pub restarts: usize,
    #[serde(default = "HeuristicConfig::default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Quadrature resolution for the continuous norm; `None` picks
    /// `max(512, 8 · required_grid)`.
    #[serde(default)]
    pub grid_size: Option<usize>,
}

impl HeuristicConfig {
    fn default_restarts() -> usize {
        32
    }

    fn default_iterations() -> usize {
        200
    }

    pub fn grid_for(&self, dict: &Dictionary, p: f64) -> usize {
        self.grid_size
            .unwrap_or_else(|| (8 * NormSpec::required_grid(dict, p)).max(512))
    }
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            restarts: Self::default_restarts(),
            iterations: Self::default_iterations(),
            seed: 0,
            grid_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchPolicy {
    #[serde(default = "SearchPolicy::default_cap")]
    pub enumeration_cap: u64,
    #[serde(default)]
    pub sampling: Option<SupportSampling>,
    #[serde(default)]
    pub heuristic: HeuristicConfig,
    /// Supports that are always visited in addition to the enumerated or
    /// sampled ones.
    #[serde(default)]
    pub extra_supports: Vec<Vec<usize>>,
}

impl SearchPolicy {
    fn default_cap() -> u64 {
        DEFAULT_ENUMERATION_CAP
    }

    pub fn exhaustive() -> Self {
        SearchPolicy {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            sampling: None,
            heuristic: HeuristicConfig::default(),
            extra_supports: Vec::new(),
        }
    }

    pub fn sampled(count: usize, seed: u64) -> Self {
        SearchPolicy {
            sampling: Some(SupportSampling {
                count,
                seed,
                always: true,
            }),
            ..Self::exhaustive()
        }
    }
}

impl Default for SearchPolicy {
    fn default() -> Self {
        Self::exhaustive()
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact extremes of `discrete_lp(f, ξ, 2)² / ‖f‖₂²` over `f` supported on `support`.
pub fn ratio_extremes_p2(
    points: &PointSet,
    dict: &Dictionary,
    support: &[usize],
) -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
    check_support(dict, support)?;
    let design = dict.design_matrix(points.nodes(), support);
    let e = pencil_extremes(&empirical_gram(&design), &dict.gram_submatrix(support), support)?;
    Ok((e.min, e.max, e.vec_min, e.vec_max))
}

fn check_support(dict: &Dictionary, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidSupport("empty support".into()));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) || support.last().is_some_and(|&j| j >= dict.len()) {
        return Err(Error::InvalidSupport(format!(
            "support {support:?} is not a strictly increasing subset of 0..{}",
            dict.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Extreme {
    value: f64,
    support: Vec<usize>,
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct Aggregate {
    min: Option<Extreme>,
    max: Option<Extreme>,
    count: u64,
}

fn prefer(a: Option<Extreme>, b: Option<Extreme>, better: impl Fn(f64, f64) -> bool) -> Option<Extreme> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if better(b.value, a.value) || (b.value == a.value && b.support < a.support) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

impl Aggregate {
    fn single(support: &[usize], e: SupportExtremes) -> Self {
        Aggregate {
            min: Some(Extreme {
                value: e.min,
                support: support.to_vec(),
                coeffs: e.vec_min,
            }),
            max: Some(Extreme {
                value: e.max,
                support: support.to_vec(),
                coeffs: e.vec_max,
            }),
            count: 1,
        }
    }

    fn merge(self, other: Self) -> Self {
        Aggregate {
            min: prefer(self.min, other.min, |x, y| x < y),
            max: prefer(self.max, other.max, |x, y| x > y),
            count: self.count + other.count,
        }
    }
}

fn score_all<S: SupportScorer>(scorer: &S, supports: &[Vec<usize>]) -> Result<Aggregate> {
    supports
        .par_iter()
        .map(|s| scorer.score(s).map(|e| Aggregate::single(s, e)))
        .try_reduce(Aggregate::default, |a, b| Ok(a.merge(b)))
}

const CHUNK: usize = 1 << 14;

fn run<S: SupportScorer>(scorer: &S, visit: &Visit, n: usize, v: usize) -> Result<Aggregate> {
    match visit {
        Visit::Exhaustive => {
            let mut acc = Aggregate::default();
            for chunk in &(0..n).combinations(v).chunks(CHUNK) {
                let batch: Vec<Vec<usize>> = chunk.collect();
                acc = acc.merge(score_all(scorer, &batch)?);
            }
            Ok(acc)
        }
        Visit::Listed(list) => score_all(scorer, list),
    }
}

enum Visit {
    Exhaustive,
    Listed(Vec<Vec<usize>>),
}

fn random_supports(n: usize, v: usize, s: &SupportSampling) -> Vec<Vec<usize>> {
    let mut rng = seeded(s.seed);
    (0..s.count)
        .map(|_| {
            let mut idx = sample(&mut rng, n, v).into_vec();
            idx.sort_unstable();
            idx
        })
        .collect()
}

/// Worst-case ratios `(1/m)∑|f(ξ^j)|^p / ‖f‖_p^p` over `f ∈ Σ_v`.
pub fn verify_universal(
    points: &PointSet,
    dict: &Dictionary,
    v: usize,
    p: f64,
    epsilon: f64,
    policy: &SearchPolicy,
) -> Result<DiscretizationReport> {
    let n = dict.len();
    if v == 0 || v > n {
        return Err(invalid(format!("sparsity v = {v} must lie in 1..={n}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p = {p} must be finite and at least 1")));
    }
    for s in &policy.extra_supports {
        if s.len() > v {
            return Err(Error::InvalidSupport(format!("extra support {s:?} exceeds v = {v}")));
        }
        check_support(dict, s)?;
    }

    let total = binomial(n, v);
    let over_cap = total > policy.enumeration_cap as u128;
    let sampled = match policy.sampling {
        Some(s) if s.always || over_cap => Some(s),
        None if over_cap => {
            return Err(Error::CombinatorialOverflow {
                count: total,
                cap: policy.enumeration_cap,
            })
        }
        _ => None,
    };
    let visit = match (&sampled, policy.extra_supports.is_empty()) {
        (None, true) => Visit::Exhaustive,
        (None, false) => {
            let mut all: Vec<Vec<usize>> = (0..n).combinations(v).collect();
            all.extend(policy.extra_supports.iter().cloned());
            Visit::Listed(all)
        }
        (Some(s), _) => {
            let mut list = random_supports(n, v, s);
            list.extend(policy.extra_supports.iter().cloned());
            Visit::Listed(list)
        }
    };

    let exact = p == 2.0;
    let (agg, grid_size) = if exact {
        (run(&ExactP2Scorer::new(dict, points.nodes()), &visit, n, v)?, None)
    } else {
        let grid = policy.heuristic.grid_for(dict, p);
        let scorer = HeuristicScorer::new(dict, points.nodes(), p, grid, policy.heuristic);
        (run(&scorer, &visit, n, v)?, Some(grid))
    };

    let certified = exact && sampled.is_none();
    let min = agg.min.expect("at least one support visited");
    let max = agg.max.expect("at least one support visited");
    let r_min = min.value.max(0.0);
    let r_max = max.value.max(r_min);
    Ok(DiscretizationReport {
        p,
        v,
        epsilon,
        m: points.len(),
        r_min,
        r_max,
        pass: r_min >= 1.0 - epsilon && r_max <= 1.0 + epsilon,
        mode: if certified {
            VerificationMode::ExactEnumeration
        } else {
            VerificationMode::HeuristicSearch
        },
        certified,
        supports_checked: agg.count,
        supports_total: total,
        grid_size,
        witness_min: Witness {
            support: min.support,
            coeffs: min.coeffs,
            ratio: r_min,
        },
        witness_max: Witness {
            support: max.support,
            coeffs: max.coeffs,
            ratio: r_max,
        },
    })
}

/// Discrete-to-continuous ratio of a single function, using the Gram form
/// at `p = 2` and the rectangle rule on `grid_size` points otherwise.
pub fn function_ratio(f: &SparseFunction<'_>, points: &PointSet, p: f64, grid_size: usize) -> Result<f64> {
    let cont = if p == 2.0 {
        f.gram_quadratic()
    } else {
        grid_mean_pow(f, p, grid_size)
    };
    if !(cont > 0.0) {
        return Err(Error::ZeroFunction);
    }
    Ok(discrete_mean_pow(f, points, p) / cont)
}

/// Recomputes a witness ratio from scratch under the report's norm settings.
pub fn witness_ratio(
    report: &DiscretizationReport,
    witness: &Witness,
    points: &PointSet,
    dict: &Dictionary,
) -> Result<f64> {
    let f = witness.function(dict)?;
    let grid = report.grid_size.unwrap_or(crate::function_space::DEFAULT_GRID);
    function_ratio(&f, points, report.p, grid)
}

/// Whether `(1−ε)‖f‖_p^p ≤ (1/m)∑|f(ξ^j)|^p ≤ (1+ε)‖f‖_p^p`.
pub fn check_instance(f: &SparseFunction<'_>, points: &PointSet, p: f64, epsilon: f64) -> Result<bool> {
    let cont = lp_norm(f, NormSpec::new(p)).powf(p);
    if !(cont > 0.0) {
        return Err(Error::ZeroFunction);
    }
    let disc = discrete_mean_pow(f, points, p);
    Ok(disc >= (1.0 - epsilon) * cont && disc <= (1.0 + epsilon) * cont)
}

/// Lacunary witness that the sparse Nikolskii inequality fails for `p > 2`.
///
/// Returns `(grid_max(f) / ‖f‖_p, v^{1/p})` for `f = ∑_{j=1}^{v} cos(2π 2^j x)`,
/// built on the smallest trigonometric dictionary that contains it.
pub fn nikolskii_counterexample(v: usize, p: f64) -> Result<(f64, f64)> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p = {p} must be finite and at least 2")));
    }
    if v == 0 {
        return Err(invalid("v must be at least 1"));
    }
    let top = 1usize
        .checked_shl(v as u32)
        .filter(|_| v < 40)
        .ok_or(Error::FrequencyOverflow {
            v,
            max_frequency: 1 << 39,
        })?;
    let dict = Dictionary::trig_real(top);
    let f = lacunary_function(v, &dict)?;
    let lower = sup_norm(&f).grid_max;
    let grid = (NormSpec::required_grid(&dict, p) * 4).max(crate::function_space::DEFAULT_GRID);
    let norm = lp_norm(&f, NormSpec::with_grid(p, grid));
    Ok((lower / norm, (v as f64).powf(1.0 / p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{equispaced, sample_iid};

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn p2_extremes_examples() {
        let d = Dictionary::trig_real(2);
        let xi = equispaced(4).unwrap();
        let (lo, hi, _, _) = ratio_extremes_p2(&sample_iid(5, 1).unwrap(), &d, &[0]).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let (lo, hi, _, _) = ratio_extremes_p2(&xi, &d, &[3]).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        let (lo, hi, _, _) = ratio_extremes_p2(&xi, &d, &[1, 2]).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aliasing_witness() {
        let d = Dictionary::trig_real(2);
        let r = verify_universal(&equispaced(4).unwrap(), &d, 1, 2.0, 0.5, &SearchPolicy::exhaustive()).unwrap();
        assert!((r.r_max - 2.0).abs() < 1e-10);
        assert_eq!(r.witness_max.support, vec![3]);
        assert!(!r.pass);
        assert_eq!(r.mode, VerificationMode::ExactEnumeration);
        assert_eq!(r.supports_checked, 5);
    }

    #[test]
    fn overflow_without_sampling() {
        let d = Dictionary::trig_real(2);
        let policy = SearchPolicy {
            enumeration_cap: 3,
            ..SearchPolicy::exhaustive()
        };
        let err = verify_universal(&equispaced(8).unwrap(), &d, 2, 2.0, 0.5, &policy).unwrap_err();
        assert_eq!(err, Error::CombinatorialOverflow { count: 10, cap: 3 });
        let policy = SearchPolicy {
            enumeration_cap: 3,
            sampling: Some(SupportSampling {
                count: 4,
                seed: 2,
                always: false,
            }),
            ..SearchPolicy::exhaustive()
        };
        let r = verify_universal(&equispaced(8).unwrap(), &d, 2, 2.0, 0.5, &policy).unwrap();
        assert_eq!(r.mode, VerificationMode::HeuristicSearch);
        assert!(!r.certified);
        assert_eq!(r.supports_checked, 4);
    }

    #[test]
    fn heuristic_agrees_with_eigen_at_p2_scale() {
        // The heuristic scorer at p = 2 must land near the exact pencil extremes.
        let d = Dictionary::trig_real(2);
        let xi = sample_iid(9, 3).unwrap();
        let support = [1, 4];
        let (lo, hi, _, _) = ratio_extremes_p2(&xi, &d, &support).unwrap();
        let s = HeuristicScorer::new(&d, xi.nodes(), 2.0, 512, HeuristicConfig::default());
        let e = s.score(&support).unwrap();
        assert!((e.min - lo).abs() < 1e-6, "{} vs {lo}", e.min);
        assert!((e.max - hi).abs() < 1e-6, "{} vs {hi}", e.max);
    }

    #[test]
    fn check_instance_examples() {
        let d = Dictionary::trig_real(2);
        let xi = equispaced(4).unwrap();
        let one = SparseFunction::single(&d, 0, 1.0).unwrap();
        assert!(check_instance(&one, &xi, 3.0, 0.01).unwrap());
        let c2 = SparseFunction::single(&d, 3, 1.0).unwrap();
        assert!(!check_instance(&c2, &xi, 2.0, 0.5).unwrap());
        let c1 = SparseFunction::single(&d, 1, 1.0).unwrap();
        assert!(check_instance(&c1, &xi, 2.0, 0.01).unwrap());
        assert_eq!(
            check_instance(&SparseFunction::zero(&d), &xi, 2.0, 0.1),
            Err(Error::ZeroFunction)
        );
    }

    #[test]
    fn nikolskii_single_cosine() {
        let (ratio, reference) = nikolskii_counterexample(1, 4.0).unwrap();
        assert!((ratio - 1.0 / 0.375f64.powf(0.25)).abs() < 1e-8);
        assert_eq!(reference, 1.0);
        let (r2, _) = nikolskii_counterexample(3, 2.0).unwrap();
        assert!((r2 - 6f64.sqrt()).abs() < 1e-9);
    }
}
