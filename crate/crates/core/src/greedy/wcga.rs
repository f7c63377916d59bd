use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::function_space::{reference_grid, Dictionary, NormSpec};
use crate::greedy::{check_target, weak_argmax, AlgorithmSpec, GreedyAlgorithm, GreedyTrace};

const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

/// Weak Chebyshev greedy algorithm in `L_p`, `2 ≤ p < ∞`, on a quadrature grid.
#[derive(Debug, Clone, Copy)]
pub struct Wcga {
    p: f64,
    t_weak: f64,
}

impl Wcga {
    pub fn new(p: f64, t_weak: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(invalid(format!("WCGA needs finite p ≥ 2, got {p}")));
        }
        if !(t_weak > 0.0 && t_weak <= 1.0) {
            return Err(invalid(format!("weakness t = {t_weak} must lie in (0, 1]")));
        }
        Ok(Wcga { p, t_weak })
    }

    fn grid_size(&self, dict: &Dictionary) -> usize {
        (8 * NormSpec::required_grid(dict, self.p)).max(512)
    }
}

fn mean_pow(e: &DVector<f64>, p: f64) -> f64 {
    e.iter().map(|x| x.abs().powf(p)).sum::<f64>() / e.len() as f64
}

/// `argmin_x (1/G)∑|y − Ax|^p` by damped Newton with backtracking.
fn best_approximation(a: &DMatrix<f64>, y: &DVector<f64>, p: f64, start: DVector<f64>) -> Result<DVector<f64>> {
    let rows = a.nrows() as f64;
    let scale = mean_pow(y, p).max(f64::MIN_POSITIVE);
    let mut x = start;
    let mut e = y - a * &x;
    let mut f = mean_pow(&e, p);
    for _ in 0..MAX_ITERATIONS {
        if f <= scale * TOLERANCE.powf(p).max(1e-300) {
            return Ok(x);
        }
        let w1 = e.map(|r| r.abs().powf(p - 1.0) * r.signum());
        let w2 = e.map(|r| r.abs().powf(p - 2.0));
        let grad = -(a.transpose() * w1) * (p / rows);
        let mut hess = a.transpose() * DMatrix::from_diagonal(&w2) * a * (p * (p - 1.0) / rows);
        let ridge = 1e-14 * hess.trace().max(f64::MIN_POSITIVE);
        for i in 0..hess.nrows() {
            hess[(i, i)] += ridge;
        }
        let step = hess
            .cholesky()
            .map(|c| c.solve(&(-&grad)))
            .unwrap_or_else(|| -&grad);
        let decrement = -grad.dot(&step);
        if decrement <= TOLERANCE * f {
            return Ok(x);
        }
        let mut tau = 1.0;
        loop {
            let cand = &x + &step * tau;
            let ec = y - a * &cand;
            let fc = mean_pow(&ec, p);
            if fc <= f - 1e-4 * tau * decrement {
                x = cand;
                e = ec;
                f = fc;
                break;
            }
            tau *= 0.5;
            if tau < 1e-20 {
                if decrement <= 1e3 * TOLERANCE * f || f <= scale * 1e-24 {
                    return Ok(x);
                }
                return Err(Error::ConvergenceFailure(format!(
                    "line search stalled at objective {f:e} with decrement {decrement:e}"
                )));
            }
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "no convergence within {MAX_ITERATIONS} iterations (objective {f:e})"
    )))
}

impl GreedyAlgorithm for Wcga {
    fn spec(&self) -> AlgorithmSpec {
        AlgorithmSpec::Wcga {
            t_weak: self.t_weak,
            p: self.p,
        }
    }

    fn run(&self, dict: &Dictionary, target: &[f64], m: usize, label: &str) -> Result<GreedyTrace> {
        check_target(dict, target, m)?;
        let all: Vec<usize> = (0..dict.len()).collect();
        let mut psi = dict.design_matrix(&reference_grid(self.grid_size(dict)), &all);
        for j in 0..dict.len() {
            let norm = dict.element_l2(j);
            psi.column_mut(j).unscale_mut(norm);
        }
        let y = &psi * DVector::from_column_slice(target);
        let p = self.p;
        let sigma0 = mean_pow(&y, p).powf(1.0 / p);
        let mut norms = vec![sigma0];
        let mut chosen: Vec<usize> = Vec::new();
        let mut selected = vec![false; dict.len()];
        let mut residual = y.clone();
        let mut coeffs = DVector::zeros(0);

        for _ in 0..m {
            let rn = mean_pow(&residual, p).powf(1.0 / p);
            if rn <= 1e-12 * sigma0.max(f64::MIN_POSITIVE) {
                break;
            }
            let w = residual.map(|r| r.abs().powf(p - 1.0) * r.signum());
            let action: Vec<f64> = (psi.transpose() * w / (residual.len() as f64 * rn.powf(p - 1.0)))
                .iter()
                .copied()
                .collect();
            let Some((j, best)) = weak_argmax(&action, &selected, self.t_weak) else {
                break;
            };
            if best <= 1e-14 {
                break;
            }
            selected[j] = true;
            chosen.push(j);
            let a = psi.select_columns(chosen.iter());
            let mut start = DVector::zeros(chosen.len());
            start.rows_mut(0, coeffs.len()).copy_from(&coeffs);
            coeffs = best_approximation(&a, &y, p, start)?;
            residual = &y - &a * &coeffs;
            norms.push(mean_pow(&residual, p).powf(1.0 / p));
        }
        Ok(GreedyTrace {
            target: label.to_string(),
            algorithm: self.spec(),
            residual_norms: norms,
            selected_indices: chosen,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::Ogp;

    #[test]
    fn hilbert_case_matches_ogp() {
        let d = Dictionary::trig_real(4);
        let target: Vec<f64> = (0..9)
            .map(|j| ((j + 1) as f64).sqrt() * if j % 2 == 0 { 1.0 } else { -0.7 })
            .collect();
        let a = Ogp.run(&d, &target, 6, "t").unwrap();
        let b = Wcga::new(2.0, 1.0).unwrap().run(&d, &target, 6, "t").unwrap();
        assert_eq!(a.selected_indices, b.selected_indices);
        for (x, y) in a.residual_norms.iter().zip(&b.residual_norms) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn single_element_in_lp() {
        let d = Dictionary::trig_real(3);
        let mut target = vec![0.0; 7];
        target[1] = 1.0;
        for p in [2.0, 3.0, 4.0, 6.0] {
            let t = Wcga::new(p, 1.0).unwrap().run(&d, &target, 1, "psi1").unwrap();
            assert_eq!(t.selected_indices, vec![1]);
            assert!(t.residual_norms[1] < 1e-8, "p = {p}: {:?}", t.residual_norms);
        }
    }

    #[test]
    fn residuals_nonincreasing_for_p4() {
        let d = Dictionary::trig_real(4);
        let target: Vec<f64> = (0..9).map(|j| if j % 3 == 0 { 0.3 } else { -0.1 * j as f64 }).collect();
        let t = Wcga::new(4.0, 0.8).unwrap().run(&d, &target, 9, "t").unwrap();
        assert!(t.residual_norms.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{:?}", t.residual_norms);
        let mut s = t.selected_indices.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), t.selected_indices.len());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Wcga::new(1.5, 1.0).is_err());
        assert!(Wcga::new(4.0, 0.0).is_err());
        assert!(Wcga::new(f64::INFINITY, 1.0).is_err());
    }
}
