use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function_space::Dictionary;
use crate::rng::{derive_seed, seeded};
use crate::sampling::{sample_iid, PointSet, Provenance};
use crate::verifier::{verify_universal, DiscretizationReport, SearchPolicy};

/// Multipliers and retry limits for the dense-then-subsample construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStageParams {
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub max_retries: usize,
    pub subsample_trials: usize,
}

impl Default for TwoStageParams {
    fn default() -> Self {
        TwoStageParams {
            c1: 1.0,
            c2: 1.0,
            epsilon: 0.5,
            max_retries: 32,
            subsample_trials: 64,
        }
    }
}

impl TwoStageParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c1.is_finite()) || !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(invalid("c1 and c2 must be positive and finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

/// `m₁ = ⌈c1 · N² · log₂(2N)⌉`.
pub fn stage1_size(n: usize, c1: f64) -> usize {
    let n = n as f64;
    (c1 * n * n * (2.0 * n).log2()).ceil() as usize
}

/// `m = ⌈c2 · v · log₂(2N)² · log₂(2v)²⌉`.
pub fn stage2_size(n: usize, v: usize, c2: f64) -> usize {
    let ln = (2.0 * n as f64).log2();
    let lv = (2.0 * v as f64).log2();
    (c2 * v as f64 * ln * ln * lv * lv).ceil() as usize
}

const STAGE1_LOWER: f64 = 0.8;
const STAGE1_UPPER: f64 = 1.2;

/// Whether the dense set discretizes the whole span at `p` and at `2`
/// within `[4/5, 6/5]`.
fn stage1_passes(points: &PointSet, dict: &Dictionary, p: f64, policy: &SearchPolicy) -> Result<bool> {
    let n = dict.len();
    let whole = SearchPolicy {
        sampling: None,
        extra_supports: Vec::new(),
        ..policy.clone()
    };
    let mut exponents = vec![2.0];
    if p != 2.0 {
        exponents.push(p);
    }
    for q in exponents {
        let r = verify_universal(points, dict, n, q, 0.5, &whole)?;
        if !r.within(STAGE1_LOWER, STAGE1_UPPER) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`two_stage_with`] under exhaustive verification.
pub fn two_stage(
    dict: &Dictionary,
    v: usize,
    p: f64,
    params: &TwoStageParams,
    seed: u64,
) -> Result<(PointSet, DiscretizationReport)> {
    two_stage_with(dict, v, p, params, seed, &SearchPolicy::exhaustive())
}

/// Draws a dense iid set that discretizes the whole span, then searches for
/// a random subset of the near-linear target size that passes universal
/// verification with tolerance `params.epsilon`.
///
/// Subset trials run in parallel; the lowest passing trial index wins.
pub fn two_stage_with(
    dict: &Dictionary,
    v: usize,
    p: f64,
    params: &TwoStageParams,
    seed: u64,
    policy: &SearchPolicy,
) -> Result<(PointSet, DiscretizationReport)> {
    params.validate()?;
    let n = dict.len();
    if v == 0 || v > n {
        return Err(invalid(format!("sparsity v = {v} must lie in 1..={n}")));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(invalid(format!("exponent p = {p} must lie in [1, 2]")));
    }
    let m1 = stage1_size(n, params.c1);
    let m = stage2_size(n, v, params.c2);
    let attempts = params.max_retries + 1;
    let mut stage1_ok = 0;

    for attempt in 0..attempts {
        let attempt_seed = derive_seed(seed, attempt as u64);
        let dense = sample_iid(m1, attempt_seed)?;
        if !stage1_passes(&dense, dict, p, policy)? {
            continue;
        }
        stage1_ok += 1;
        let provenance = |trial: Option<usize>| Provenance::TwoStage {
            params: *params,
            seed,
            stage1_size: m1,
            attempt,
            trial,
        };

        if m >= m1 {
            let points = PointSet::new(dense.nodes().to_vec(), provenance(None))?;
            let report = verify_universal(&points, dict, v, p, params.epsilon, policy)?;
            if report.pass {
                return Ok((points, report));
            }
            continue;
        }

        let found = (0..params.subsample_trials).into_par_iter().find_map_first(|trial| {
            let mut rng = seeded(derive_seed(attempt_seed, (1 << 32) + trial as u64));
            let mut positions = sample(&mut rng, m1, m).into_vec();
            positions.sort_unstable();
            let attempt = dense
                .subset(&positions, provenance(Some(trial)))
                .and_then(|pts| {
                    verify_universal(&pts, dict, v, p, params.epsilon, policy).map(|r| (pts, r))
                });
            match attempt {
                Ok((pts, r)) if r.pass => Some(Ok((pts, r))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            }
        });
        if let Some(result) = found {
            return result;
        }
    }

    if stage1_ok == 0 {
        Err(Error::Stage1Failed { attempts })
    } else {
        Err(Error::BudgetExhausted {
            attempts: stage1_ok,
            trials: params.subsample_trials,
        })
    }
}
