//! Experiment drivers: minimal passing sizes of random point sets and
//! greedy runs over random members of the octahedron.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::Dictionary;
use crate::greedy::{GreedyAlgorithm, GreedyTrace};
use crate::rng::{derive_seed, seeded};
use crate::sampling::{sample_iid, PointSet, Provenance};
use crate::verifier::{verify_universal, SearchPolicy};

/// Smallest prefix length `m ≤ m_max` of one seeded iid sequence whose
/// verification passes, found by doubling from `v` and then bisecting.
///
/// Passing need not be monotone in `m`; the search returns the boundary it
/// brackets, which is the usual notion for these sweeps.
pub fn minimal_passing_m(
    dict: &Dictionary,
    v: usize,
    p: f64,
    epsilon: f64,
    seed: u64,
    m_max: usize,
    policy: &SearchPolicy,
) -> Result<Option<usize>> {
    if m_max < v.max(1) {
        return Err(invalid(format!("m_max = {m_max} is below v = {v}")));
    }
    let full = sample_iid(m_max, seed)?;
    let passes = |m: usize| -> Result<bool> {
        let prefix = PointSet::new(full.nodes()[..m].to_vec(), Provenance::Iid { seed })?;
        Ok(verify_universal(&prefix, dict, v, p, epsilon, policy)?.pass)
    };
    let mut hi = v.max(1);
    let mut lo = 0;
    loop {
        if passes(hi)? {
            break;
        }
        if hi == m_max {
            return Ok(None);
        }
        lo = hi;
        hi = (2 * hi).min(m_max);
    }
    // Invariant: lo fails (or is zero), hi passes.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// One sweep point: the class and the minimal sizes found per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub max_frequency: usize,
    pub n: usize,
    pub v: usize,
    pub p: f64,
    pub epsilon: f64,
    pub minima: Vec<Option<usize>>,
    pub median_m: Option<f64>,
}

#[derive(Serialize)]
struct ScalingCsvRow {
    max_frequency: usize,
    n: usize,
    v: usize,
    p: f64,
    epsilon: f64,
    seeds: usize,
    failures: usize,
    median_m: Option<f64>,
    minima: String,
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let row = ScalingCsvRow {
            max_frequency: r.max_frequency,
            n: r.n,
            v: r.v,
            p: r.p,
            epsilon: r.epsilon,
            seeds: r.minima.len(),
            failures: r.minima.iter().filter(|m| m.is_none()).count(),
            median_m: r.median_m,
            minima: r
                .minima
                .iter()
                .map(|m| m.map_or_else(|| "none".to_string(), |m| m.to_string()))
                .collect::<Vec<_>>()
                .join(";"),
        };
        w.serialize(row).map_err(|e| invalid(format!("CSV: {e}")))?;
    }
    w.flush().map_err(|e| invalid(format!("CSV: {e}")))?;
    Ok(())
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

/// Least-squares fit of `y = c·x^α` in log–log coordinates, returning `(c, α)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("a power-law fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&z| !(z > 0.0)) {
        return Err(invalid("power-law fits need positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("power-law fits need at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    Ok(((my - alpha * mx).exp(), alpha))
}

/// Sweep parameters: sparsities, exponent, tolerance, number of seeds, base
/// seed and the largest size tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub vs: Vec<usize>,
    pub p: f64,
    pub epsilon: f64,
    pub seeds: usize,
    pub seed: u64,
    pub m_max: usize,
}

/// Minimal passing sizes for every `v` and seed on one dictionary. Seeds
/// are derived per seed index from the base seed, so rows do not depend on
/// which sparsities are swept.
pub fn scaling_sweep(dict: &Dictionary, spec: &ScalingSpec, policy: &SearchPolicy) -> Result<Vec<ScalingRow>> {
    let ScalingSpec {
        ref vs,
        p,
        epsilon,
        seeds,
        seed,
        m_max,
    } = *spec;
    if seeds == 0 {
        return Err(invalid("at least one seed is needed"));
    }
    let jobs: Vec<(usize, usize)> = vs.iter().flat_map(|&v| (0..seeds).map(move |s| (v, s))).collect();
    let found = jobs
        .par_iter()
        .map(|&(v, s)| minimal_passing_m(dict, v, p, epsilon, derive_seed(seed, s as u64), m_max, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(vs
        .iter()
        .zip(found.chunks(seeds))
        .map(|(&v, minima)| {
            let ok: Vec<f64> = minima.iter().flatten().map(|&m| m as f64).collect();
            ScalingRow {
                max_frequency: dict.max_frequency(),
                n: dict.len(),
                v,
                p,
                epsilon,
                minima: minima.to_vec(),
                median_m: if ok.len() == minima.len() { median(&ok) } else { None },
            }
        })
        .collect())
}

/// A random point of the unit `ℓ₁` sphere on `k` uniformly chosen
/// coordinates among the first `len`: random signs and weights uniform on
/// the simplex.
pub fn a1_member<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize, k: usize) -> Vec<f64> {
    let idx = rand::seq::index::sample(rng, len, k).into_vec();
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut c = vec![0.0; n];
    for (&j, wj) in idx.iter().zip(w) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        c[j] = sign * wj / total;
    }
    c
}

/// `count` random members of `A₁` over the first `len` elements, each with
/// a uniformly drawn number of nonzero coefficients.
pub fn a1_corpus(n: usize, len: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if len == 0 || len > n {
        return Err(invalid(format!("corpus length {len} must lie in 1..={n}")));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = seeded(derive_seed(seed, i as u64));
            let k = rng.random_range(1..=len);
            a1_member(&mut rng, n, len, k)
        })
        .collect())
}

/// Runs `algorithm` for `m` steps on every target, in parallel; traces are
/// labelled `a1-<index>`.
pub fn greedy_corpus(
    dict: &Dictionary,
    algorithm: &dyn GreedyAlgorithm,
    targets: &[Vec<f64>],
    m: usize,
) -> Result<Vec<GreedyTrace>> {
    targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| algorithm.run(dict, t, m, &format!("a1-{i}")))
        .collect()
}
