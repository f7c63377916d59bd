//! Small dense symmetric eigen helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub(crate) struct SortedEigen {
    pub values: Vec<f64>,
    /// Columns aligned with `values`.
    pub vectors: DMatrix<f64>,
}

impl SortedEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min_vector(&self) -> Vec<f64> {
        self.vectors.column(0).iter().copied().collect()
    }

    pub fn max_vector(&self) -> Vec<f64> {
        self.vectors
            .column(self.values.len() - 1)
            .iter()
            .copied()
            .collect()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

fn sorted(eig: SymmetricEigen<f64, nalgebra::Dyn>) -> SortedEigen {
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SortedEigen { values, vectors }
}

pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let mut m = m.clone();
    symmetrize(&mut m);
    sorted(SymmetricEigen::new(m))
}

/// Solves `A x = λ B x` for symmetric `A` and symmetric positive definite `B`.
///
/// Eigenvectors are `B`-normalized (`xᵀ B x = 1`). Returns `None` when the
/// Cholesky factorization of `B` fails.
pub(crate) fn generalized_symmetric_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<SortedEigen> {
    let chol = Cholesky::new(b.clone())?;
    let l = chol.l();
    if l.diagonal().iter().any(|d| !(*d > 1e-150)) {
        return None;
    }
    let y = l.solve_lower_triangular(a)?;
    let mut c = l.solve_lower_triangular(&y.transpose())?;
    symmetrize(&mut c);
    let eig = sorted(SymmetricEigen::new(c));
    let lt = l.transpose();
    let vectors = lt.solve_upper_triangular(&eig.vectors)?;
    Some(SortedEigen {
        values: eig.values,
        vectors,
    })
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let v = DVector::from_column_slice(x);
    (v.transpose() * m * &v)[(0, 0)]
}

/// Solves the symmetric positive definite system `m x = rhs`.
pub(crate) fn spd_solve(m: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let chol = Cholesky::new(m.clone())?;
    let x = chol.solve(&DVector::from_column_slice(rhs));
    Some(x.iter().copied().collect())
}
