use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{Dictionary, SparseFunction};

/// Default resolution of the reference quadrature grid.
pub const DEFAULT_GRID: usize = 1 << 14;

/// Exponent and reference-grid resolution for continuous norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub grid_size: usize,
}

impl NormSpec {
    pub fn new(p: f64) -> Self {
        NormSpec {
            p,
            grid_size: DEFAULT_GRID,
        }
    }

    pub fn with_grid(p: f64, grid_size: usize) -> Self {
        NormSpec { p, grid_size }
    }

    /// Smallest grid that resolves `|f|^p` on `dict`: `2·K·max(2, ⌈p⌉)`, and at least one point.
    pub fn required_grid(dict: &Dictionary, p: f64) -> usize {
        let factor = if p.is_finite() { p.ceil().max(2.0) as usize } else { 2 };
        (2 * dict.max_frequency() * factor).max(1)
    }

    pub fn validate(&self, dict: &Dictionary) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(invalid(format!("exponent must be at least 1, got {}", self.p)));
        }
        if self.grid_size == 0 {
            return Err(invalid("grid_size must be positive"));
        }
        let need = Self::required_grid(dict, self.p);
        if self.grid_size < need {
            return Err(invalid(format!(
                "grid_size {} below the resolution {need} required for p = {} and max frequency {}",
                self.grid_size,
                self.p,
                dict.max_frequency()
            )));
        }
        Ok(())
    }
}

/// Equispaced reference grid `{i / n}`.
pub fn reference_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// `(1/n) ∑ |f(i/n)|^p`, the rectangle rule for `‖f‖_p^p`.
pub fn grid_mean_pow(f: &SparseFunction<'_>, p: f64, grid_size: usize) -> f64 {
    let n = grid_size as f64;
    (0..grid_size)
        .map(|i| f.evaluate(i as f64 / n).abs().powf(p))
        .sum::<f64>()
        / n
}

/// `‖f‖_p`: exact Gram form for `p = 2`, rectangle rule otherwise.
///
/// An infinite exponent yields the grid maximum, the lower side of [`sup_norm`].
pub fn lp_norm(f: &SparseFunction<'_>, spec: NormSpec) -> f64 {
    if spec.p == 2.0 {
        f.gram_quadratic().sqrt()
    } else {
        lp_norm_grid(f, spec)
    }
}

/// `‖f‖_p` by the rectangle rule regardless of `p`.
pub fn lp_norm_grid(f: &SparseFunction<'_>, spec: NormSpec) -> f64 {
    if spec.p.is_infinite() {
        return sup_norm_with(f, spec.grid_size).grid_max;
    }
    grid_mean_pow(f, spec.p, spec.grid_size).powf(1.0 / spec.p)
}

/// Two-sided bracket `grid_max ≤ ‖f‖_∞ ≤ certified_upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupBracket {
    pub grid_max: f64,
    pub certified_upper: f64,
}

pub fn sup_norm(f: &SparseFunction<'_>) -> SupBracket {
    sup_norm_with(f, DEFAULT_GRID)
}

pub fn sup_norm_with(f: &SparseFunction<'_>, grid_size: usize) -> SupBracket {
    let n = grid_size as f64;
    let grid_max = (0..grid_size)
        .map(|i| f.evaluate(i as f64 / n).abs())
        .fold(0.0, f64::max);
    SupBracket {
        grid_max,
        certified_upper: certified_upper(
            grid_max,
            1.0 / n,
            f.derivative_bound(),
            f.second_derivative_bound(),
            f.coeff_l1(),
        ),
    }
}

/// Smallest of three valid upper bounds for `‖f‖_∞` given its maximum on a
/// grid of spacing `h`: first-order `L₁h/2`, second-order `L₂h²/8` (the
/// derivative vanishes at an interior maximum of a periodic function), and
/// the coefficient `ℓ₁` norm.
pub(crate) fn certified_upper(grid_max: f64, h: f64, d1: f64, d2: f64, coeff_l1: f64) -> f64 {
    let first = grid_max + 0.5 * d1 * h;
    let second = grid_max + 0.125 * d2 * h * h;
    first.min(second).min(coeff_l1).max(grid_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_l2_is_parseval() {
        let d = Dictionary::trig_real(1);
        let f = SparseFunction::single(&d, 1, 1.0).unwrap();
        assert!((lp_norm(&f, NormSpec::new(2.0)) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_has_unit_norms() {
        let d = Dictionary::trig_real(1);
        let f = SparseFunction::single(&d, 0, 1.0).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((lp_norm(&f, NormSpec::new(p)) - 1.0).abs() < 1e-12);
        }
        let b = sup_norm(&f);
        assert_eq!((b.grid_max, b.certified_upper), (1.0, 1.0));
    }

    #[test]
    fn cosine_l4_closed_form() {
        let d = Dictionary::trig_real(1);
        let f = SparseFunction::single(&d, 1, 1.0).unwrap();
        let expected = 0.375f64.powf(0.25);
        assert!((lp_norm(&f, NormSpec::new(4.0)) - expected).abs() < 1e-8);
    }

    #[test]
    fn sup_of_aligned_cosines() {
        let d = Dictionary::trig_real(4);
        let f = SparseFunction::single(&d, 1, 1.0).unwrap();
        assert_eq!(sup_norm(&f).grid_max, 1.0);
        let g = SparseFunction::new(&d, vec![3, 7], vec![1.0, 1.0]).unwrap();
        let b = sup_norm(&g);
        assert_eq!(b.grid_max, 2.0);
        assert!(b.certified_upper >= 2.0 && b.certified_upper <= 2.0 + 1e-6);
    }

    #[test]
    fn grid_requirement() {
        let d = Dictionary::trig_real(4);
        assert_eq!(NormSpec::required_grid(&d, 1.0), 16);
        assert_eq!(NormSpec::required_grid(&d, 4.0), 32);
        assert!(NormSpec::with_grid(4.0, 16).validate(&d).is_err());
        assert!(NormSpec::with_grid(4.0, 32).validate(&d).is_ok());
        assert!(NormSpec::with_grid(0.5, 64).validate(&d).is_err());
    }
}
