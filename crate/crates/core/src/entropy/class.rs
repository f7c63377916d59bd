use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{grid_mean_pow, Dictionary, NormSpec, SparseFunction};
use crate::linalg::quadratic_form;

/// Distance used by the entropy estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sup,
    L2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sup => "sup",
            Metric::L2 => "l2",
        }
    }
}

/// The unit ball `{f ∈ Σ_v : ‖f‖_p ≤ 1}`, optionally restricted to a subset
/// of dictionary elements.
#[derive(Debug, Clone)]
pub struct ClassSpec<'d> {
    pub dict: &'d Dictionary,
    pub v: usize,
    pub p: f64,
    pub elements: Option<Vec<usize>>,
}

impl<'d> ClassSpec<'d> {
    pub fn new(dict: &'d Dictionary, v: usize, p: f64) -> Self {
        ClassSpec {
            dict,
            v,
            p,
            elements: None,
        }
    }

    pub fn restricted(dict: &'d Dictionary, v: usize, p: f64, elements: Vec<usize>) -> Self {
        ClassSpec {
            dict,
            v,
            p,
            elements: Some(elements),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("class exponent p = {} must be finite and at least 1", self.p)));
        }
        let pool = self.pool();
        if pool.is_empty() || pool.windows(2).any(|w| w[0] >= w[1]) || pool.iter().any(|&j| j >= self.dict.len()) {
            return Err(invalid(format!(
                "element restriction {pool:?} must be a strictly increasing subset of 0..{}",
                self.dict.len()
            )));
        }
        if self.v == 0 || self.v > pool.len() {
            return Err(invalid(format!("sparsity v = {} must lie in 1..={}", self.v, pool.len())));
        }
        Ok(())
    }

    /// Dictionary indices the class may use.
    pub fn pool(&self) -> Vec<usize> {
        self.elements
            .clone()
            .unwrap_or_else(|| (0..self.dict.len()).collect())
    }

    /// All maximal supports, lexicographically ordered.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.pool().into_iter().combinations(self.v).collect()
    }

    pub(crate) fn grid(&self) -> usize {
        (8 * NormSpec::required_grid(self.dict, self.p)).max(512)
    }

    /// `‖f‖_p^p` of dense coefficients restricted to `support`.
    pub(crate) fn norm_pow(&self, support: &[usize], coeffs: &[f64]) -> f64 {
        if self.p == 2.0 {
            return quadratic_form(&self.dict.gram_submatrix(support), coeffs).max(0.0);
        }
        let f = SparseFunction::new(self.dict, support.to_vec(), coeffs.to_vec())
            .expect("supports come from the class");
        grid_mean_pow(&f, self.p, self.grid())
    }

    fn gram_inverse(&self, support: &[usize]) -> DMatrix<f64> {
        self.dict
            .gram_submatrix(support)
            .try_inverse()
            .expect("Riesz Gram submatrices are invertible")
    }

    /// Per-coordinate bound `|a_j| ≤ b_j` on class members with this support.
    pub(crate) fn coordinate_bounds(&self, support: &[usize]) -> Vec<f64> {
        let inv = self.gram_inverse(support);
        (0..support.len())
            .map(|i| {
                if self.p == 2.0 {
                    inv[(i, i)].max(0.0).sqrt()
                } else {
                    // a = G⁻¹(⟨f, φ_k⟩) and |⟨f, φ_k⟩| ≤ ‖f‖₁ ≤ ‖f‖_p.
                    inv.row(i).iter().map(|x| x.abs()).sum()
                }
            })
            .collect()
    }

    fn sign_patterns(k: usize) -> impl Iterator<Item = Vec<f64>> {
        (0..1u64 << k).map(move |mask| {
            (0..k)
                .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
    }

    /// Largest `ℓ₁` coefficient norm on `{‖f‖₂ ≤ 1}`, which bounds `‖f‖_∞`.
    fn ellipsoid_l1(&self) -> f64 {
        self.supports()
            .iter()
            .map(|s| {
                let inv = self.gram_inverse(s);
                Self::sign_patterns(s.len())
                    .map(|sg| quadratic_form(&inv, &sg).max(0.0).sqrt())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound on `‖f‖_∞` over the class.
    pub fn sup_bound(&self) -> f64 {
        let e = self.ellipsoid_l1();
        let by_interpolation = if self.p < 2.0 { e.powf(2.0 / self.p) } else { e };
        let by_coordinates = self
            .supports()
            .iter()
            .map(|s| self.coordinate_bounds(s).iter().sum::<f64>())
            .fold(0.0, f64::max);
        by_interpolation.min(by_coordinates)
    }

    /// Upper bound on `‖f‖₂` over the class.
    pub fn l2_bound(&self) -> f64 {
        if self.p >= 2.0 {
            1.0
        } else {
            self.sup_bound().powf(1.0 - self.p / 2.0)
        }
    }

    pub fn radius(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Sup => self.sup_bound(),
            Metric::L2 => self.l2_bound(),
        }
    }

    /// A random member: uniform support, uniform direction in the coefficient
    /// cube, and norm `0.999·U` with `U` uniform on `[0, 1]`.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> SparseFunction<'d> {
        let supports = self.supports();
        let support = supports[rng.random_range(0..supports.len())].clone();
        loop {
            let coeffs: Vec<f64> = (0..support.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = self.norm_pow(&support, &coeffs).powf(1.0 / self.p);
            if norm > 1e-9 {
                let scale = 0.999 * rng.random::<f64>() / norm;
                let coeffs = coeffs.iter().map(|c| c * scale).collect();
                return SparseFunction::new(self.dict, support, coeffs).expect("supports come from the class");
            }
        }
    }

    /// `max_s ‖∑ s_j φ_j‖` over sign vectors, in the class norm and in `metric`.
    fn sign_sums(&self, metric: Metric) -> (f64, f64) {
        let mut class_norm: f64 = 0.0;
        let mut metric_norm: f64 = 0.0;
        for s in self.supports() {
            let gram = self.dict.gram_submatrix(&s);
            for sg in Self::sign_patterns(s.len()) {
                class_norm = class_norm.max(self.norm_pow(&s, &sg).powf(1.0 / self.p));
                let m = match metric {
                    Metric::Sup => s.len() as f64,
                    Metric::L2 => quadratic_form(&gram, &sg).max(0.0).sqrt(),
                };
                metric_norm = metric_norm.max(m);
            }
        }
        (class_norm, metric_norm)
    }

    /// `B` such that every class member lies within `δ·B` (in `metric`) of
    /// a class member with coefficients in `δℤ`.
    ///
    /// Shrinking `f` by `1 − δ/(2ρ)` with `1/ρ = max_s ‖∑ s_j φ_j‖_p` keeps its
    /// rounding inside the class.
    pub fn distortion(&self, metric: Metric) -> f64 {
        let (inv_rho, rounding) = self.sign_sums(metric);
        self.radius(metric) * inv_rho / 2.0 + rounding / 2.0
    }
}

/// Class members with coefficients in `δℤ`, as dense length-`N` vectors.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub points: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn enumerate(class: &ClassSpec<'_>, delta: f64, cap: u64) -> Result<Lattice, u64> {
        let n = class.dict.len();
        let supports = class.supports();
        let mut total: u64 = 0;
        let mut ranges = Vec::with_capacity(supports.len());
        for s in &supports {
            let half: Vec<i64> = class
                .coordinate_bounds(s)
                .iter()
                .map(|b| (b / delta + 1e-9).floor() as i64)
                .collect();
            let count = half
                .iter()
                .try_fold(1u64, |acc, h| acc.checked_mul(2 * *h as u64 + 1))
                .unwrap_or(u64::MAX);
            total = total.saturating_add(count);
            ranges.push(half);
        }
        if total > cap {
            return Err(total);
        }

        let mut points = Vec::new();
        for (s, half) in supports.iter().zip(&ranges) {
            let mut idx: Vec<i64> = half.iter().map(|h| -h).collect();
            'odometer: loop {
                let coeffs: Vec<f64> = idx.iter().map(|&k| k as f64 * delta).collect();
                if class.norm_pow(s, &coeffs) <= 1.0 + 1e-12 {
                    let mut dense = vec![0.0; n];
                    for (&j, &c) in s.iter().zip(&coeffs) {
                        dense[j] = c;
                    }
                    points.push(dense);
                }
                for pos in 0..idx.len() {
                    if idx[pos] < half[pos] {
                        idx[pos] += 1;
                        continue 'odometer;
                    }
                    idx[pos] = -half[pos];
                }
                break;
            }
        }
        Ok(Lattice::dedup(points))
    }

    /// Drops repeated points (shared by supports through zero coordinates),
    /// keeping first occurrences.
    fn dedup(points: Vec<Vec<f64>>) -> Lattice {
        let mut seen = std::collections::HashSet::new();
        let points = points
            .into_iter()
            .filter(|p| seen.insert(p.iter().map(|x| x.to_bits()).collect::<Vec<u64>>()))
            .collect();
        Lattice { points }
    }
}
