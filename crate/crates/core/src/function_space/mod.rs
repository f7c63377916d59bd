//! Dictionaries on `[0, 1)`, sparse combinations of their elements, and
//! continuous norms.

mod dictionary;
mod norms;
mod sparse;

pub use dictionary::{trig_frequency, trig_value, Dictionary, DictionaryKind};
pub use norms::{
    grid_mean_pow, lp_norm, lp_norm_grid, reference_grid, sup_norm, sup_norm_with, NormSpec,
    SupBracket, DEFAULT_GRID,
};
pub(crate) use norms::certified_upper;
pub use sparse::SparseFunction;

use crate::error::{Error, Result};

/// `∑_{j=1}^{v} cos(2π·2^j x)` on a trigonometric dictionary.
pub fn lacunary_function(v: usize, dict: &Dictionary) -> Result<SparseFunction<'_>> {
    if dict.kind() != DictionaryKind::TrigReal {
        return Err(Error::UnsupportedDictionary {
            expected: "trig_real",
        });
    }
    let top = 1usize.checked_shl(v as u32).filter(|_| v < usize::BITS as usize);
    match top {
        Some(f) if f <= dict.max_frequency() => {}
        _ => {
            return Err(Error::FrequencyOverflow {
                v,
                max_frequency: dict.max_frequency(),
            })
        }
    }
    let support = (1..=v).map(|j| 2 * (1usize << j) - 1).collect();
    SparseFunction::new(dict, support, vec![1.0; v])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lacunary_two() {
        let d = Dictionary::trig_real(4);
        let f = lacunary_function(2, &d).unwrap();
        assert_eq!(sup_norm(&f).grid_max, 2.0);
        assert!((lp_norm(&f, NormSpec::new(2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lacunary_overflow() {
        let d = Dictionary::trig_real(4);
        assert_eq!(
            lacunary_function(3, &d).unwrap_err(),
            Error::FrequencyOverflow {
                v: 3,
                max_frequency: 4
            }
        );
        assert!(lacunary_function(200, &d).is_err());
    }

    #[test]
    fn lacunary_needs_trig() {
        let d = Dictionary::perturbed_riesz(4, 0.1, 3).unwrap();
        assert!(matches!(
            lacunary_function(1, &d),
            Err(Error::UnsupportedDictionary { .. })
        ));
    }
}
