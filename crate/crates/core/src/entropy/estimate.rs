use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::class::{ClassSpec, Lattice, Metric};
use crate::error::{invalid, Error, Result};
use crate::function_space::{certified_upper, reference_grid, DictionaryKind, NormSpec};
use crate::linalg::quadratic_form;
use crate::rng::seeded;

/// Default cap on enumerated lattice points.
pub const DEFAULT_LATTICE_CAP: u64 = 10_000_000;

/// Bracketing counts for one class at one scale, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub scale: f64,
    pub lower_bits: Option<f64>,
    pub upper_bits: Option<f64>,
    pub lower_count: Option<u64>,
    pub upper_count: Option<u64>,
    pub metric: Metric,
    pub dictionary: DictionaryKind,
    pub n: usize,
    pub v: usize,
    pub p: f64,
    pub delta: f64,
    pub candidates: usize,
}

impl EntropyEstimate {
    fn blank(class: &ClassSpec<'_>, scale: f64, metric: Metric, delta: f64) -> Self {
        EntropyEstimate {
            scale,
            lower_bits: None,
            upper_bits: None,
            lower_count: None,
            upper_count: None,
            metric,
            dictionary: class.dict.kind(),
            n: class.dict.len(),
            v: class.v,
            p: class.p,
            delta,
            candidates: 0,
        }
    }

    /// Joins a packing estimate and a covering estimate at the same scale.
    pub fn combine(lower: &EntropyEstimate, upper: &EntropyEstimate) -> EntropyEstimate {
        EntropyEstimate {
            lower_bits: lower.lower_bits,
            lower_count: lower.lower_count,
            upper_bits: upper.upper_bits,
            upper_count: upper.upper_count,
            delta: upper.delta,
            candidates: upper.candidates.max(lower.candidates),
            ..upper.clone()
        }
    }
}

pub fn write_estimates_csv<W: Write>(rows: &[EntropyEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| invalid(format!("CSV: {e}")))?;
    }
    w.flush().map_err(|e| invalid(format!("CSV: {e}")))?;
    Ok(())
}

/// Lattice step whose rounding distortion is `t/8`, leaving covering radius `3t/4`.
pub fn default_delta(class: &ClassSpec<'_>, t: f64, metric: Metric) -> f64 {
    t / (8.0 * class.distortion(metric))
}

/// Function values on a grid plus exact `L₂` geometry, for pairwise distances.
struct Cloud<'a> {
    metric: Metric,
    design: DMatrix<f64>,
    gram: &'a DMatrix<f64>,
    h: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    coeffs: Vec<DVector<f64>>,
    values: Vec<DVector<f64>>,
}

impl<'a> Cloud<'a> {
    fn new(class: &ClassSpec<'a>, metric: Metric) -> Self {
        let dict = class.dict;
        let grid_size = (16 * NormSpec::required_grid(dict, 2.0)).max(256);
        let all: Vec<usize> = (0..dict.len()).collect();
        Cloud {
            metric,
            design: dict.design_matrix(&reference_grid(grid_size), &all),
            gram: dict.gram(),
            h: 1.0 / grid_size as f64,
            d1: all.iter().map(|&j| dict.derivative_bound(j)).collect(),
            d2: all.iter().map(|&j| dict.second_derivative_bound(j)).collect(),
            coeffs: Vec::new(),
            values: Vec::new(),
        }
    }

    fn push(&mut self, dense: Vec<f64>) -> usize {
        let c = DVector::from_vec(dense);
        self.values.push(&self.design * &c);
        self.coeffs.push(c);
        self.coeffs.len() - 1
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    fn l2(&self, diff: &DVector<f64>) -> f64 {
        quadratic_form(self.gram, diff.as_slice()).max(0.0).sqrt()
    }

    /// `(lower, upper)` bracket on the distance between members `i` and `j`.
    fn distance(&self, i: usize, j: usize) -> (f64, f64) {
        let diff = &self.coeffs[i] - &self.coeffs[j];
        let l2 = self.l2(&diff);
        match self.metric {
            Metric::L2 => (l2, l2),
            Metric::Sup => {
                let grid_max = (&self.values[i] - &self.values[j]).amax();
                let abs = diff.map(f64::abs);
                let d1 = abs.iter().zip(&self.d1).map(|(a, b)| a * b).sum();
                let d2 = abs.iter().zip(&self.d2).map(|(a, b)| a * b).sum();
                let upper = certified_upper(grid_max, self.h, d1, d2, abs.sum());
                (grid_max.max(l2), upper)
            }
        }
    }

    /// Whether the certified distance is at most `r`, pruning with the `L₂` lower bound.
    fn within(&self, i: usize, j: usize, r: f64) -> bool {
        let diff = &self.coeffs[i] - &self.coeffs[j];
        if self.l2(&diff) > r {
            return false;
        }
        self.distance(i, j).1 <= r
    }
}

/// Upper bound on the `t`-covering number of the class.
///
/// A `δ`-lattice inside the class is greedily covered by balls of radius
/// `t − 2δB` centered at lattice points, where `δB` bounds the distance from
/// any class member to the lattice. Distances use certified upper brackets.
pub fn covering_upper(class: &ClassSpec<'_>, t: f64, delta: f64) -> Result<EntropyEstimate> {
    covering_upper_with(class, t, delta, Metric::Sup, DEFAULT_LATTICE_CAP)
}

pub fn covering_upper_with(
    class: &ClassSpec<'_>,
    t: f64,
    delta: f64,
    metric: Metric,
    cap: u64,
) -> Result<EntropyEstimate> {
    class.validate()?;
    if !(t > 0.0 && delta > 0.0) {
        return Err(invalid("scale t and lattice step delta must be positive"));
    }
    let mut est = EntropyEstimate::blank(class, t, metric, delta);
    if class.radius(metric) <= t {
        est.upper_count = Some(1);
        est.upper_bits = Some(0.0);
        return Ok(est);
    }
    let slack = 2.0 * delta * class.distortion(metric);
    let r = t - slack;
    if !(r > 0.0) {
        return Err(invalid(format!(
            "scale t = {t} must exceed the lattice slack 2δB = {slack}; use a smaller delta"
        )));
    }
    let lattice = Lattice::enumerate(class, delta, cap).map_err(|points| Error::GridOverflow { points, cap })?;
    let mut cloud = Cloud::new(class, metric);
    for p in lattice.points {
        cloud.push(p);
    }
    let n = cloud.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).filter(|&j| i == j || cloud.within(i, j, r)).collect())
        .collect();

    // Cover the most isolated uncovered point first, by whichever ball
    // through it gains the most.
    let degree: Vec<usize> = neighbours.iter().map(Vec::len).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (degree[i], i));
    let mut covered = vec![false; n];
    let mut gain = degree.clone();
    let mut count = 0u64;
    for u in order {
        if covered[u] {
            continue;
        }
        let best = neighbours[u]
            .iter()
            .copied()
            .fold(u, |acc, i| if gain[i] > gain[acc] { i } else { acc });
        count += 1;
        for &j in &neighbours[best] {
            if !covered[j] {
                covered[j] = true;
                for &k in &neighbours[j] {
                    gain[k] -= 1;
                }
            }
        }
    }
    est.upper_count = Some(count);
    est.upper_bits = Some((count as f64).log2());
    est.candidates = n;
    Ok(est)
}

/// Candidates for packing: normalized signed elements, zero, a coarse
/// lattice when it is small, then seeded random class members.
fn packing_candidates(class: &ClassSpec<'_>, t: f64, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = class.dict.len();
    let mut out = Vec::new();
    for j in class.pool() {
        let norm = class.norm_pow(&[j], &[1.0]).powf(1.0 / class.p);
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[j] = sign / norm;
            out.push(d);
        }
    }
    out.push(vec![0.0; n]);
    if let Ok(l) = Lattice::enumerate(class, t, 20_000) {
        out.extend(l.points);
    }
    let supports = class.supports();
    let mut rng = seeded(seed);
    for _ in 0..trials {
        let s = &supports[rng.random_range(0..supports.len())];
        let raw: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = class.norm_pow(s, &raw).powf(1.0 / class.p);
        if !(norm > 0.0) {
            continue;
        }
        let radius = rng.random::<f64>().powf(1.0 / s.len() as f64);
        let mut d = vec![0.0; n];
        for (&j, &c) in s.iter().zip(&raw) {
            d[j] = c * radius / norm;
        }
        out.push(d);
    }
    out
}

/// Lower bound on the `t`-covering number from a greedily grown set whose
/// pairwise distances provably exceed `2t`.
pub fn packing_lower(class: &ClassSpec<'_>, t: f64, trials: usize, seed: u64) -> Result<EntropyEstimate> {
    packing_lower_with(class, t, trials, seed, Metric::Sup)
}

pub fn packing_lower_with(
    class: &ClassSpec<'_>,
    t: f64,
    trials: usize,
    seed: u64,
    metric: Metric,
) -> Result<EntropyEstimate> {
    class.validate()?;
    if !(t > 0.0) {
        return Err(invalid("scale t must be positive"));
    }
    let candidates = packing_candidates(class, t, trials, seed);
    let total = candidates.len();
    let mut cloud = Cloud::new(class, metric);
    let mut accepted: Vec<usize> = Vec::new();
    for c in candidates {
        let i = cloud.push(c);
        if accepted.iter().all(|&a| cloud.distance(i, a).0 > 2.0 * t) {
            accepted.push(i);
        }
    }
    let mut est = EntropyEstimate::blank(class, t, metric, 0.0);
    let count = accepted.len() as u64;
    est.lower_count = Some(count);
    est.lower_bits = Some((count as f64).log2());
    est.candidates = total;
    Ok(est)
}
