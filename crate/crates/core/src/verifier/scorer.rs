//! Per-support extremes of the discrete-to-continuous ratio
//! `(1/m)∑|f(ξ^j)|^p / ‖f‖_p^p`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::function_space::Dictionary;
use crate::linalg::generalized_symmetric_eigen;
use crate::rng::{derive_seed, seeded};
use crate::verifier::HeuristicConfig;

#[derive(Debug, Clone)]
pub(crate) struct SupportExtremes {
    pub min: f64,
    pub max: f64,
    pub vec_min: Vec<f64>,
    pub vec_max: Vec<f64>,
}

pub(crate) trait SupportScorer: Sync {
    fn score(&self, support: &[usize]) -> Result<SupportExtremes>;
}

/// `(1/m) Φᵀ Φ` for the design matrix `Φ`.
pub(crate) fn empirical_gram(design: &DMatrix<f64>) -> DMatrix<f64> {
    let m = design.nrows() as f64;
    design.transpose() * design / m
}

fn select(m: &DMatrix<f64>, support: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(support.len(), support.len(), |a, b| m[(support[a], support[b])])
}

/// Exact extremes for `p = 2` from the pencil `(A_G, G_G)`.
pub(crate) struct ExactP2Scorer<'a> {
    dict: &'a Dictionary,
    empirical: DMatrix<f64>,
}

impl<'a> ExactP2Scorer<'a> {
    pub fn new(dict: &'a Dictionary, nodes: &[f64]) -> Self {
        let all: Vec<usize> = (0..dict.len()).collect();
        let design = dict.design_matrix(nodes, &all);
        ExactP2Scorer {
            dict,
            empirical: empirical_gram(&design),
        }
    }
}

pub(crate) fn pencil_extremes(
    empirical: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    support: &[usize],
) -> Result<SupportExtremes> {
    let eig = generalized_symmetric_eigen(empirical, gram).ok_or_else(|| Error::SingularGram {
        support: support.to_vec(),
    })?;
    Ok(SupportExtremes {
        min: eig.min().max(0.0),
        max: eig.max(),
        vec_min: eig.min_vector(),
        vec_max: eig.max_vector(),
    })
}

impl SupportScorer for ExactP2Scorer<'_> {
    fn score(&self, support: &[usize]) -> Result<SupportExtremes> {
        let a = select(&self.empirical, support);
        let g = self.dict.gram_submatrix(support);
        pencil_extremes(&a, &g, support)
    }
}

/// Projected-gradient search over coefficient directions for `p ≠ 2`.
///
/// The continuous norm is the rectangle rule on `grid_size` points. Reported
/// maxima are attained values (lower bounds on the true maximum) and minima
/// likewise upper bounds on the true minimum.
pub(crate) struct HeuristicScorer<'a> {
    dict: &'a Dictionary,
    p: f64,
    design: DMatrix<f64>,
    grid: DMatrix<f64>,
    empirical: DMatrix<f64>,
    cfg: HeuristicConfig,
}

impl<'a> HeuristicScorer<'a> {
    pub fn new(dict: &'a Dictionary, nodes: &[f64], p: f64, grid_size: usize, cfg: HeuristicConfig) -> Self {
        let all: Vec<usize> = (0..dict.len()).collect();
        let design = dict.design_matrix(nodes, &all);
        let grid_nodes: Vec<f64> = (0..grid_size).map(|i| i as f64 / grid_size as f64).collect();
        let grid = dict.design_matrix(&grid_nodes, &all);
        let empirical = empirical_gram(&design);
        HeuristicScorer {
            dict,
            p,
            design,
            grid,
            empirical,
            cfg,
        }
    }
}

/// Mean of `|Mc|^p` and its gradient in `c`.
fn mean_pow_grad(mat: &DMatrix<f64>, c: &DVector<f64>, p: f64) -> (f64, DVector<f64>) {
    let e = mat * c;
    let rows = mat.nrows() as f64;
    let mut total = 0.0;
    let w = e.map(|x| {
        let a = x.abs();
        total += a.powf(p);
        if x == 0.0 {
            0.0
        } else {
            a.powf(p - 1.0) * x.signum()
        }
    });
    (total / rows, mat.transpose() * w * (p / rows))
}

fn mean_pow(mat: &DMatrix<f64>, c: &DVector<f64>, p: f64) -> f64 {
    let e = mat * c;
    e.iter().map(|x| x.abs().powf(p)).sum::<f64>() / mat.nrows() as f64
}

struct Objective<'m> {
    discrete: &'m DMatrix<f64>,
    continuous: &'m DMatrix<f64>,
    p: f64,
}

impl Objective<'_> {
    /// Rescales `c` to unit continuous norm; `None` for the zero function.
    fn normalize(&self, c: DVector<f64>) -> Option<DVector<f64>> {
        let cont = mean_pow(self.continuous, &c, self.p);
        if !(cont > 0.0) || !cont.is_finite() {
            return None;
        }
        Some(c / cont.powf(1.0 / self.p))
    }

    fn ratio(&self, c: &DVector<f64>) -> f64 {
        mean_pow(self.discrete, c, self.p) / mean_pow(self.continuous, c, self.p)
    }

    fn ratio_grad(&self, c: &DVector<f64>) -> (f64, DVector<f64>) {
        let (d, gd) = mean_pow_grad(self.discrete, c, self.p);
        let (k, gk) = mean_pow_grad(self.continuous, c, self.p);
        (d / k, (gd * k - gk * d) / (k * k))
    }

    /// Ascent (`sense = 1`) or descent (`sense = -1`) with step halving on
    /// non-improvement.
    fn climb(&self, start: DVector<f64>, sense: f64, iterations: usize) -> Option<(f64, DVector<f64>)> {
        let mut c = self.normalize(start)?;
        let (mut r, mut g) = self.ratio_grad(&c);
        let mut step = 0.25;
        for _ in 0..iterations {
            let gn = g.norm();
            if !(gn > 0.0) || step < 1e-12 {
                break;
            }
            let cand = &c + &g * (sense * step * c.norm() / gn);
            let improved = self.normalize(cand).and_then(|cand| {
                let rc = self.ratio(&cand);
                (sense * (rc - r) > 0.0).then_some((rc, cand))
            });
            match improved {
                Some((rc, cand)) => {
                    c = cand;
                    r = rc;
                    g = self.ratio_grad(&c).1;
                }
                None => step *= 0.5,
            }
        }
        Some((r, c))
    }
}

fn support_seed(base: u64, support: &[usize]) -> u64 {
    support
        .iter()
        .fold(derive_seed(base, support.len() as u64), |acc, &j| derive_seed(acc, j as u64))
}

impl SupportScorer for HeuristicScorer<'_> {
    fn score(&self, support: &[usize]) -> Result<SupportExtremes> {
        let s = support.len();
        let discrete = self.design.select_columns(support.iter());
        let continuous = self.grid.select_columns(support.iter());
        let obj = Objective {
            discrete: &discrete,
            continuous: &continuous,
            p: self.p,
        };

        let mut starts: Vec<DVector<f64>> = Vec::with_capacity(self.cfg.restarts + 2);
        let gram = self.dict.gram_submatrix(support);
        let emp = select(&self.empirical, support);
        if let Some(eig) = generalized_symmetric_eigen(&emp, &gram) {
            starts.push(DVector::from_vec(eig.min_vector()));
            starts.push(DVector::from_vec(eig.max_vector()));
        }
        for k in 0..s.min(self.cfg.restarts) {
            starts.push(DVector::from_fn(s, |i, _| if i == k { 1.0 } else { 0.0 }));
        }
        let mut rng = seeded(support_seed(self.cfg.seed, support));
        while starts.len() < self.cfg.restarts.max(1) + 2.min(starts.len()) {
            starts.push(DVector::from_fn(s, |_, _| rng.random_range(-1.0..1.0)));
        }

        let mut best_max: Option<(f64, DVector<f64>)> = None;
        let mut best_min: Option<(f64, DVector<f64>)> = None;
        for start in starts {
            if let Some((r, c)) = obj.climb(start.clone(), 1.0, self.cfg.iterations) {
                if best_max.as_ref().is_none_or(|(b, _)| r > *b) {
                    best_max = Some((r, c));
                }
            }
            if let Some((r, c)) = obj.climb(start, -1.0, self.cfg.iterations) {
                if best_min.as_ref().is_none_or(|(b, _)| r < *b) {
                    best_min = Some((r, c));
                }
            }
        }
        match (best_min, best_max) {
            (Some((lo, vlo)), Some((hi, vhi))) => Ok(SupportExtremes {
                min: lo,
                max: hi,
                vec_min: vlo.iter().copied().collect(),
                vec_max: vhi.iter().copied().collect(),
            }),
            _ => Err(Error::SingularGram {
                support: support.to_vec(),
            }),
        }
    }
}
