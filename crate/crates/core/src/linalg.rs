//! Dense Hermitian helpers. Real inputs are routed through real arithmetic so
//! that eigenvectors of real matrices stay real.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::frame::Field;
use crate::C64;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
pub(crate) struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: DMatrix<C64>,
}

pub(crate) fn hermitian_eigen(m: &DMatrix<C64>, field: Field) -> Eigen {
    let n = m.nrows();
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = match field {
        Field::Real => {
            let real = m.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            )
        }
        Field::Complex => {
            let eig = SymmetricEigen::new(m.clone());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Eigen {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Singular values of a `d x n` matrix, descending.
pub(crate) fn singular_values(m: &DMatrix<C64>, field: Field) -> Vec<f64> {
    let mut sv: Vec<f64> = match field {
        Field::Real => m.map(|z| z.re).singular_values().iter().copied().collect(),
        Field::Complex => m.clone().singular_values().iter().copied().collect(),
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `Phi Phi^*`, made exactly Hermitian.
pub(crate) fn frame_operator(phi: &DMatrix<C64>) -> DMatrix<C64> {
    let s = phi * phi.adjoint();
    hermitian_part(&s)
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(m[(r, r)].re, 0.0)
        } else if r < c {
            (m[(r, c)] + m[(c, r)].conj()) * 0.5
        } else {
            (m[(c, r)] + m[(r, c)].conj()).conj() * 0.5
        }
    })
}

/// Extracts a `rank x n` factor `sqrt(Lambda) V^*` from the leading eigenpairs
/// of an `n x n` Hermitian matrix. Negative eigenvalues are clamped to zero.
/// If `fixed` is given, every kept eigenvalue is replaced by it.
pub(crate) fn leading_factor(
    m: &DMatrix<C64>,
    rank: usize,
    field: Field,
    fixed: Option<f64>,
) -> DMatrix<C64> {
    let eig = hermitian_eigen(m, field);
    let n = m.nrows();
    DMatrix::from_fn(rank, n, |r, c| {
        let lambda = fixed.unwrap_or(eig.values[r]).max(0.0);
        eig.vectors[(c, r)].conj() * lambda.sqrt()
    })
}

/// Scales every column of `m` to unit norm in place. Returns false if some
/// column vanished.
pub(crate) fn normalize_columns(m: &mut DMatrix<C64>) -> bool {
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        col.unscale_mut(norm);
    }
    true
}

/// Drops imaginary parts, for keeping real frames exactly real.
pub(crate) fn make_real(m: &mut DMatrix<C64>) {
    for z in m.iter_mut() {
        z.im = 0.0;
    }
}
