use crate::error::{Error, Result};
use crate::function_space::Dictionary;
use crate::linalg::quadratic_form;

/// An element of `Σ_v`: a finite combination of dictionary elements.
#[derive(Debug, Clone)]
pub struct SparseFunction<'d> {
    dict: &'d Dictionary,
    support: Vec<usize>,
    coeffs: Vec<f64>,
}

impl<'d> SparseFunction<'d> {
    /// `support` must be strictly increasing and in range.
    pub fn new(dict: &'d Dictionary, support: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        if support.len() != coeffs.len() {
            return Err(Error::InvalidSupport(format!(
                "{} indices but {} coefficients",
                support.len(),
                coeffs.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport(format!(
                "indices must be strictly increasing: {support:?}"
            )));
        }
        if let Some(&last) = support.last() {
            if last >= dict.len() {
                return Err(Error::InvalidSupport(format!(
                    "index {last} out of range for N = {}",
                    dict.len()
                )));
            }
        }
        Ok(SparseFunction {
            dict,
            support,
            coeffs,
        })
    }

    pub fn zero(dict: &'d Dictionary) -> Self {
        SparseFunction {
            dict,
            support: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    /// `c · φ_j`.
    pub fn single(dict: &'d Dictionary, j: usize, c: f64) -> Result<Self> {
        Self::new(dict, vec![j], vec![c])
    }

    /// Builds from a length-`N` coefficient vector, keeping the nonzero entries.
    pub fn from_dense(dict: &'d Dictionary, dense: &[f64]) -> Result<Self> {
        if dense.len() != dict.len() {
            return Err(Error::InvalidSupport(format!(
                "dense vector has length {}, dictionary has {}",
                dense.len(),
                dict.len()
            )));
        }
        let (support, coeffs) = dense
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| (j, *c))
            .unzip();
        Ok(SparseFunction {
            dict,
            support,
            coeffs,
        })
    }

    pub fn dictionary(&self) -> &'d Dictionary {
        self.dict
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `v = |support|`.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SparseFunction {
            dict: self.dict,
            support: self.support.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dict.len()];
        for (&j, &c) in self.support.iter().zip(&self.coeffs) {
            dense[j] = c;
        }
        dense
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, &c)| c * self.dict.eval(j, x))
            .sum()
    }

    pub fn evaluate_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// Exact `‖f‖₂²` from the Gram matrix.
    pub fn gram_quadratic(&self) -> f64 {
        let g = self.dict.gram_submatrix(&self.support);
        quadratic_form(&g, &self.coeffs).max(0.0)
    }

    /// `∑|a_j|`, an upper bound on `‖f‖_∞` since every element is bounded by one.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn coeff_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Upper bound on `‖f′‖_∞`.
    pub fn derivative_bound(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, c)| c.abs() * self.dict.derivative_bound(j))
            .sum()
    }

    /// Upper bound on `‖f″‖_∞`.
    pub fn second_derivative_bound(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, c)| c.abs() * self.dict.second_derivative_bound(j))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_basics() {
        let d = Dictionary::trig_real(2);
        let one = SparseFunction::single(&d, 0, 1.0).unwrap();
        assert_eq!(one.evaluate(0.37), 1.0);
        let c = SparseFunction::single(&d, 1, 1.0).unwrap();
        assert_eq!(c.evaluate(0.0), 1.0);
        let s = SparseFunction::single(&d, 2, 1.0).unwrap();
        assert!((s.evaluate(0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_validation() {
        let d = Dictionary::trig_real(1);
        assert!(SparseFunction::new(&d, vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseFunction::new(&d, vec![0, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseFunction::new(&d, vec![3], vec![1.0]).is_err());
        assert!(SparseFunction::new(&d, vec![0], vec![]).is_err());
        let z = SparseFunction::zero(&d);
        assert_eq!(z.sparsity(), 0);
        assert_eq!(z.evaluate(0.3), 0.0);
    }

    #[test]
    fn dense_round_trip() {
        let d = Dictionary::trig_real(2);
        let f = SparseFunction::from_dense(&d, &[0.0, 2.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(f.support(), &[1, 3]);
        assert_eq!(f.to_dense(), vec![0.0, 2.0, 0.0, -1.0, 0.0]);
    }
}
