use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::function_space::Dictionary;
use crate::greedy::{check_target, weak_argmax, AlgorithmSpec, GreedyAlgorithm, GreedyTrace};
use crate::linalg::spd_solve;

/// Orthogonal greedy pursuit in `L₂` with exact inner products.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ogp;

/// Gram matrix of the normalized system `ψ_j = φ_j / ‖φ_j‖₂`.
pub(crate) fn normalized_gram(dict: &Dictionary) -> DMatrix<f64> {
    let g = dict.gram();
    DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] / (g[(i, i)] * g[(j, j)]).sqrt())
}

impl GreedyAlgorithm for Ogp {
    fn spec(&self) -> AlgorithmSpec {
        AlgorithmSpec::Ogp
    }

    fn run(&self, dict: &Dictionary, target: &[f64], m: usize, label: &str) -> Result<GreedyTrace> {
        check_target(dict, target, m)?;
        let g = normalized_gram(dict);
        let b = DVector::from_column_slice(target);
        let gb = &g * &b;
        let norm = |r: &DVector<f64>| (r.dot(&(&g * r))).max(0.0).sqrt();

        let sigma0 = norm(&b);
        let mut residual = b.clone();
        let mut norms = vec![sigma0];
        let mut chosen: Vec<usize> = Vec::new();
        let mut selected = vec![false; dict.len()];
        let floor = 1e-14 * sigma0.max(f64::MIN_POSITIVE);

        for _ in 0..m {
            let inner: Vec<f64> = (&g * &residual).iter().copied().collect();
            let Some((j, best)) = weak_argmax(&inner, &selected, 1.0) else {
                break;
            };
            if best <= floor {
                break;
            }
            selected[j] = true;
            chosen.push(j);

            let sub = DMatrix::from_fn(chosen.len(), chosen.len(), |a, c| g[(chosen[a], chosen[c])]);
            let rhs: Vec<f64> = chosen.iter().map(|&k| gb[k]).collect();
            let x = spd_solve(&sub, &rhs).ok_or_else(|| Error::SingularGram {
                support: chosen.clone(),
            })?;
            residual = b.clone();
            for (&k, &xk) in chosen.iter().zip(&x) {
                residual[k] -= xk;
            }
            norms.push(norm(&residual));
        }
        Ok(GreedyTrace {
            target: label.to_string(),
            algorithm: AlgorithmSpec::Ogp,
            residual_norms: norms,
            selected_indices: chosen,
        })
    }
}
