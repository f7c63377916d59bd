//! Slow, independent reference computations for tests.
//!
//! Nothing here calls the dictionary evaluation, norm, verifier, greedy or
//! quadrature code it is used to check. Elements are rebuilt from the
//! dictionary's metadata (kind, perturbation, partner map) and evaluated
//! directly.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{Dictionary, DictionaryKind};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub grid_size: usize,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_size: 4096,
            random_directions: 1000,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 4096 {
            return Err(invalid(format!("oracle grid {} is below 4096", self.grid_size)));
        }
        if self.random_directions < 1000 {
            return Err(invalid(format!(
                "oracle needs at least 1000 random directions, got {}",
                self.random_directions
            )));
        }
        Ok(())
    }
}

/// `1, cos 2πx, sin 2πx, cos 4πx, …` at position `j`.
pub fn trig_basis(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let k = j.div_ceil(2) as f64;
    if j % 2 == 1 {
        (2.0 * PI * k * x).cos()
    } else {
        (2.0 * PI * k * x).sin()
    }
}

/// Element `j` of `dict`, evaluated from scratch.
pub fn element(dict: &Dictionary, j: usize, x: f64) -> f64 {
    match dict.kind() {
        DictionaryKind::TrigReal => trig_basis(j, x),
        DictionaryKind::PerturbedRiesz => {
            let d = dict.perturbation();
            (trig_basis(j, x) + d * trig_basis(dict.partner(j), x)) / (1.0 + d)
        }
    }
}

/// `∑ c_i φ_{G_i}(x)`.
pub fn combination(dict: &Dictionary, support: &[usize], coeffs: &[f64], x: f64) -> f64 {
    support.iter().zip(coeffs).map(|(&j, &c)| c * element(dict, j, x)).sum()
}

/// Midpoint-rule mean of `|g|^p` on `grid_size` cells.
pub fn dense_mean_pow(g: &dyn Fn(f64) -> f64, p: f64, grid_size: usize) -> f64 {
    let n = grid_size as f64;
    (0..grid_size)
        .map(|i| g((i as f64 + 0.5) / n).abs().powf(p))
        .sum::<f64>()
        / n
}

pub fn dense_lp_norm(g: &dyn Fn(f64) -> f64, p: f64, grid_size: usize) -> f64 {
    dense_mean_pow(g, p, grid_size).powf(1.0 / p)
}

/// Largest `|g|` on a midpoint grid; a lower bound for `‖g‖_∞`.
pub fn dense_sup(g: &dyn Fn(f64) -> f64, grid_size: usize) -> f64 {
    let n = grid_size as f64;
    (0..grid_size)
        .map(|i| g((i as f64 + 0.5) / n).abs())
        .fold(0.0, f64::max)
}

fn ratio(points: &[f64], dict: &Dictionary, support: &[usize], c: &[f64], p: f64, grid: usize) -> f64 {
    let g = |x: f64| combination(dict, support, c, x);
    let discrete = points.iter().map(|&x| g(x).abs().powf(p)).sum::<f64>() / points.len() as f64;
    discrete / dense_mean_pow(&g, p, grid)
}

fn normalize(c: &mut [f64]) -> bool {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
        true
    } else {
        false
    }
}

/// Extremes of `(1/m)∑|f(ξ)|^p / ‖f‖_p^p` over `f` supported on `support`
/// (at most three elements), by coordinate and random directions followed
/// by one shrinking pattern search around each extreme.
pub fn ratio_bruteforce(
    points: &[f64],
    dict: &Dictionary,
    support: &[usize],
    p: f64,
    cfg: &OracleConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if support.is_empty() || support.len() > 3 {
        return Err(invalid("brute-force ratios need 1 to 3 elements"));
    }
    let k = support.len();
    let eval = |c: &[f64]| ratio(points, dict, support, c, p, cfg.grid_size);
    let mut dirs: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = seeded(cfg.seed);
    while dirs.len() < k + cfg.random_directions {
        let mut c: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        if normalize(&mut c) {
            dirs.push(c);
        }
    }
    let scored: Vec<(f64, Vec<f64>)> = dirs.into_iter().map(|c| (eval(&c), c)).collect();
    let lo = scored.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("directions").clone();
    let hi = scored.iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("directions").clone();

    let refine = |(mut best, mut c): (f64, Vec<f64>), sign: f64| {
        let mut step = 0.05;
        while step > 1e-7 {
            let mut improved = false;
            for i in 0..k {
                for delta in [step, -step] {
                    let mut trial = c.clone();
                    trial[i] += delta;
                    if !normalize(&mut trial) {
                        continue;
                    }
                    let r = eval(&trial);
                    if sign * (r - best) > 0.0 {
                        best = r;
                        c = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best
    };
    Ok((refine(lo, -1.0), refine(hi, 1.0)))
}

/// `‖c − c_best_m‖₂`: drop the `m` largest magnitudes and take the norm of
/// what is left.
pub fn sigma_tail_orthonormal(coeffs: &[f64], m: usize) -> f64 {
    let mut sq: Vec<f64> = coeffs.iter().map(|c| c * c).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    sq.iter().skip(m).sum::<f64>().sqrt()
}

/// Fewest closed intervals of radius `eps` covering `[−a, a]`: `⌈a/ε⌉`.
pub fn interval_cover_count(a: f64, eps: f64) -> u64 {
    ((a / eps).ceil() as u64).max(1)
}

/// Most points of `[−a, a]` with pairwise gaps strictly above `2t`.
///
/// `k` points need a span above `2(k−1)t`, so the count is `⌊a/t⌋ + 1`
/// unless `a/t` is an integer, where the endpoints cannot both be used.
pub fn interval_packing_count(a: f64, t: f64) -> u64 {
    let q = a / t;
    if q.fract() == 0.0 {
        (q as u64).max(1)
    } else {
        q.floor() as u64 + 1
    }
}

/// Composite Simpson rule with `panels` and `2·panels` subintervals and the
/// Richardson combination of the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoResolution {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels.max(1);
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

pub fn two_resolution(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> TwoResolution {
    let coarse = simpson(f, a, b, panels);
    let fine = simpson(f, a, b, 2 * panels);
    TwoResolution {
        coarse,
        fine,
        extrapolated: fine + (fine - coarse) / 15.0,
    }
}

/// `C_p ε^{−5}(∫ u^{p/2−1}(∫_u^R H(c_p ε t)/t dt)^{1/2} du)²` for an entropy
/// function that is constant below `2R`, where the inner integral is
/// `H·ln(R/u)` exactly and `c_p` drops out.
pub fn required_m_constant_entropy(p: f64, eps: f64, r: f64, h: f64, big_c_p: f64, panels: usize) -> TwoResolution {
    let lo = (0.1 * eps.powf(1.0 / p)).ln();
    // In the variable w = ln u, with a √ singularity at w = ln R removed by
    // substituting w = ln R − s².
    let span = (r.ln() - lo).sqrt();
    let g = |s: f64| {
        let w = r.ln() - s * s;
        2.0 * s * (w * p / 2.0).exp() * (h * s * s).sqrt()
    };
    let q = two_resolution(&g, 0.0, span, panels);
    let scale = |v: f64| big_c_p * eps.powi(-5) * v * v;
    TwoResolution {
        coarse: scale(q.coarse),
        fine: scale(q.fine),
        extrapolated: scale(q.extrapolated),
    }
}
