use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::symmetric_eigen;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    TrigReal,
    PerturbedRiesz,
}

impl DictionaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DictionaryKind::TrigReal => "trig_real",
            DictionaryKind::PerturbedRiesz => "perturbed_riesz",
        }
    }
}

/// A uniformly bounded Riesz system on `[0, 1)` with the uniform measure.
///
/// Element `j` of the underlying real trigonometric system is
/// `1` for `j = 0`, `cos(2πkx)` for `j = 2k - 1` and `sin(2πkx)` for `j = 2k`.
/// The perturbed kind mixes each element with a partner,
/// `φ_j = (ψ_j + δ ψ_σ(j)) / (1 + δ)`, where `σ` has no fixed points.
#[derive(Debug, Clone)]
pub struct Dictionary {
    kind: DictionaryKind,
    max_frequency: usize,
    perturbation: f64,
    seed: Option<u64>,
    partner: Vec<usize>,
    gram: DMatrix<f64>,
    riesz_lower: f64,
    riesz_upper: f64,
}

/// `k` such that trig element `j` oscillates at frequency `k`.
pub fn trig_frequency(j: usize) -> usize {
    j.div_ceil(2)
}

/// Value of the plain trigonometric element `j` at `x`.
pub fn trig_value(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let arg = 2.0 * PI * trig_frequency(j) as f64 * x;
    if j % 2 == 1 {
        arg.cos()
    } else {
        arg.sin()
    }
}

fn trig_weight(j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        0.5
    }
}

impl Dictionary {
    pub fn trig_real(max_frequency: usize) -> Self {
        let n = 2 * max_frequency + 1;
        let gram = DMatrix::from_fn(n, n, |i, j| if i == j { trig_weight(i) } else { 0.0 });
        let riesz_lower = if n > 1 { 0.5f64.sqrt() } else { 1.0 };
        Dictionary {
            kind: DictionaryKind::TrigReal,
            max_frequency,
            perturbation: 0.0,
            seed: None,
            partner: (0..n).collect(),
            gram,
            riesz_lower,
            riesz_upper: 1.0,
        }
    }

    pub fn perturbed_riesz(max_frequency: usize, delta: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&delta) {
            return Err(invalid(format!("perturbation must lie in [0, 0.5), got {delta}")));
        }
        let n = 2 * max_frequency + 1;
        if n < 2 && delta > 0.0 {
            return Err(invalid("a one-element system has no fixed-point-free partner"));
        }
        let partner = if n < 2 {
            vec![0]
        } else {
            derangement(n, seed)
        };

        // Coefficients of φ_j in the ψ basis: column j of T.
        let scale = 1.0 / (1.0 + delta);
        let mut t = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            t[(j, j)] += scale;
            t[(partner[j], j)] += delta * scale;
        }
        let w = DMatrix::from_fn(n, n, |i, j| if i == j { trig_weight(i) } else { 0.0 });
        let gram = t.transpose() * w * &t;

        let eig = symmetric_eigen(&gram);
        if eig.min() <= 1e-10 {
            return Err(Error::DegenerateSystem {
                min_eigenvalue: eig.min(),
            });
        }
        Ok(Dictionary {
            kind: DictionaryKind::PerturbedRiesz,
            max_frequency,
            perturbation: delta,
            seed: Some(seed),
            partner,
            riesz_lower: eig.min().sqrt(),
            riesz_upper: eig.max().sqrt(),
            gram,
        })
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    /// Number of elements `N`.
    pub fn len(&self) -> usize {
        self.gram.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_frequency(&self) -> usize {
        self.max_frequency
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Partner index `σ(j)`; the identity for the plain trigonometric kind.
    pub fn partner(&self, j: usize) -> usize {
        self.partner[j]
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn riesz_lower(&self) -> f64 {
        self.riesz_lower
    }

    pub fn riesz_upper(&self) -> f64 {
        self.riesz_upper
    }

    pub fn gram_submatrix(&self, support: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(support.len(), support.len(), |a, b| {
            self.gram[(support[a], support[b])]
        })
    }

    /// `‖φ_j‖₂`.
    pub fn element_l2(&self, j: usize) -> f64 {
        self.gram[(j, j)].sqrt()
    }

    pub fn eval(&self, j: usize, x: f64) -> f64 {
        match self.kind {
            DictionaryKind::TrigReal => trig_value(j, x),
            DictionaryKind::PerturbedRiesz => {
                let d = self.perturbation;
                (trig_value(j, x) + d * trig_value(self.partner[j], x)) / (1.0 + d)
            }
        }
    }

    /// Upper bound on `‖φ_j′‖_∞`.
    pub fn derivative_bound(&self, j: usize) -> f64 {
        let k = |i: usize| 2.0 * PI * trig_frequency(i) as f64;
        match self.kind {
            DictionaryKind::TrigReal => k(j),
            DictionaryKind::PerturbedRiesz => {
                let d = self.perturbation;
                (k(j) + d * k(self.partner[j])) / (1.0 + d)
            }
        }
    }

    /// Upper bound on `‖φ_j″‖_∞`.
    pub fn second_derivative_bound(&self, j: usize) -> f64 {
        let k2 = |i: usize| (2.0 * PI * trig_frequency(i) as f64).powi(2);
        match self.kind {
            DictionaryKind::TrigReal => k2(j),
            DictionaryKind::PerturbedRiesz => {
                let d = self.perturbation;
                (k2(j) + d * k2(self.partner[j])) / (1.0 + d)
            }
        }
    }

    /// Highest frequency present in element `j` (including its partner).
    pub fn element_frequency(&self, j: usize) -> usize {
        match self.kind {
            DictionaryKind::TrigReal => trig_frequency(j),
            DictionaryKind::PerturbedRiesz => {
                trig_frequency(j).max(trig_frequency(self.partner[j]))
            }
        }
    }

    /// `m × |columns|` matrix of element values at `nodes`.
    pub fn design_matrix(&self, nodes: &[f64], columns: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(nodes.len(), columns.len(), |i, c| self.eval(columns[c], nodes[i]))
    }

    /// Largest grid value of `|φ_j|` over all elements, on an equispaced grid.
    pub fn max_element_grid_sup(&self, grid_size: usize) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..grid_size {
            let x = i as f64 / grid_size as f64;
            for j in 0..self.len() {
                best = best.max(self.eval(j, x).abs());
            }
        }
        best
    }
}

/// Seeded uniformly random cyclic permutation (Sattolo), which has no fixed points.
fn derangement(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        perm.swap(i, j);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_one_has_half_gram() {
        let d = Dictionary::trig_real(1);
        assert_eq!(d.len(), 3);
        let expected = [1.0, 0.5, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert_eq!(d.gram()[(i, j)], e);
            }
        }
    }

    #[test]
    fn trig_zero_is_constant() {
        let d = Dictionary::trig_real(0);
        assert_eq!(d.len(), 1);
        assert_eq!(d.gram()[(0, 0)], 1.0);
        assert_eq!(d.eval(0, 0.42), 1.0);
    }

    #[test]
    fn trig_two_riesz_constants() {
        let d = Dictionary::trig_real(2);
        let eig = symmetric_eigen(d.gram());
        assert!((d.riesz_lower() - 0.70710678).abs() < 1e-8);
        assert!((d.riesz_lower() - eig.min().sqrt()).abs() < 1e-12);
        assert!((d.riesz_upper() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn element_layout() {
        let d = Dictionary::trig_real(2);
        assert!((d.eval(1, 0.0) - 1.0).abs() < 1e-15);
        assert!((d.eval(2, 0.25) - 1.0).abs() < 1e-15);
        assert!((d.eval(3, 0.25) - (-1.0)).abs() < 1e-12);
        assert!((d.eval(4, 0.125) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_matches_trig() {
        let t = Dictionary::trig_real(3);
        let p = Dictionary::perturbed_riesz(3, 0.0, 11).unwrap();
        assert_eq!(t.gram(), p.gram());
        assert!((t.riesz_lower() - p.riesz_lower()).abs() < 1e-12);
        assert!((t.riesz_upper() - p.riesz_upper()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_riesz_bounds() {
        let d = Dictionary::perturbed_riesz(2, 0.25, 1).unwrap();
        let eig = symmetric_eigen(d.gram());
        assert!(eig.min() > 0.0);
        assert!(d.riesz_lower() < 0.5f64.sqrt());
        assert!(0.5f64.sqrt() < 1.0);
        assert!(1.0 <= d.riesz_upper() * 1.25);
        for j in 0..d.len() {
            assert_ne!(d.partner(j), j);
        }
        assert!(d.max_element_grid_sup(4096) <= 1.0 + 1e-12);
    }

    #[test]
    fn perturbed_gram_matches_quadrature() {
        let d = Dictionary::perturbed_riesz(2, 0.3, 5).unwrap();
        let m = 64;
        for i in 0..d.len() {
            for j in 0..d.len() {
                let q: f64 = (0..m)
                    .map(|s| {
                        let x = s as f64 / m as f64;
                        d.eval(i, x) * d.eval(j, x)
                    })
                    .sum::<f64>()
                    / m as f64;
                assert!((q - d.gram()[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbation_out_of_range_is_rejected() {
        assert!(matches!(
            Dictionary::perturbed_riesz(2, 0.6, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(Dictionary::perturbed_riesz(2, -0.1, 0).is_err());
    }
}
