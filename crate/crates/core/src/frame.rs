//! Frames of unit vectors and their Gram matrices.
//!
//! Inner products are linear in the first argument and conjugate-linear in
//! the second: `<x, y> = sum_i x_i conj(y_i)`. Only moduli of inner products
//! carry meaning for packings, but the convention fixes Gram matrices bit for
//! bit.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default column-norm tolerance for frames built in memory.
pub const NORM_TOL: f64 = 1e-10;

/// Scalar field of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "C")]
    Complex,
    #[serde(rename = "R")]
    Real,
}

impl Field {
    /// Half the real dimension of the field: 1/2 for the reals, 1 for the
    /// complex numbers.
    pub fn m(self) -> f64 {
        match self {
            Field::Real => 0.5,
            Field::Complex => 1.0,
        }
    }

    pub fn tag(self) -> char {
        match self {
            Field::Real => 'R',
            Field::Complex => 'C',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Field> {
        match tag {
            "R" | "r" => Some(Field::Real),
            "C" | "c" => Some(Field::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::from_tag(s).ok_or_else(|| Error::InvalidArgument(format!("unknown field `{s}`")))
    }
}

/// `n` unit vectors in `F^d`, stored as the columns of a `d x n` matrix.
///
/// Real frames use the complex representation with every imaginary part
/// exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFrame {
    field: Field,
    vectors: DMatrix<C64>,
}

impl UnitFrame {
    /// Validates `vectors` against the default norm tolerance.
    pub fn new(field: Field, vectors: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(field, vectors, NORM_TOL)
    }

    /// Validates `vectors`, rejecting any column whose norm differs from one
    /// by more than `norm_tol`.
    pub fn with_tolerance(field: Field, vectors: DMatrix<C64>, norm_tol: f64) -> Result<Self> {
        check_entries(field, &vectors)?;
        for (j, col) in vectors.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > norm_tol {
                return Err(Error::NotUnitNorm {
                    column: j,
                    norm,
                    tol: norm_tol,
                });
            }
        }
        Ok(UnitFrame { field, vectors })
    }

    /// Rescales every column to unit norm. Zero columns are an error.
    pub fn normalized(field: Field, mut vectors: DMatrix<C64>) -> Result<Self> {
        check_entries(field, &vectors)?;
        for (j, mut col) in vectors.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroColumn { column: j });
            }
            col.unscale_mut(norm);
        }
        Ok(UnitFrame { field, vectors })
    }

    /// Builds a frame from column-major data of declared shape `d x n`.
    pub fn from_column_major(field: Field, d: usize, n: usize, data: Vec<C64>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidArgument("d and n must be positive".into()));
        }
        if data.len() != d * n {
            return Err(Error::Dimension {
                expected: format!("{} entries for a {d} x {n} frame", d * n),
                found: format!("{} entries", data.len()),
            });
        }
        Self::new(field, DMatrix::from_vec(d, n, data))
    }

    /// Builds a real frame from real columns.
    pub fn from_real_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(d * columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(Error::Dimension {
                    expected: format!("column of length {d}"),
                    found: format!("column {j} of length {}", col.len()),
                });
            }
            data.extend(col.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_column_major(Field::Real, d, columns.len(), data)
    }

    /// The first `n` standard basis vectors of `F^d` (`n <= d`).
    pub fn standard_basis(field: Field, d: usize, n: usize) -> Result<Self> {
        if n > d || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "standard basis needs 1 <= n <= d, got n = {n}, d = {d}"
            )));
        }
        Ok(UnitFrame {
            field,
            vectors: DMatrix::identity(d, n),
        })
    }

    /// Wraps columns the caller has already normalized.
    pub(crate) fn from_normalized(field: Field, vectors: DMatrix<C64>) -> Self {
        debug_assert!(vectors.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-8));
        UnitFrame { field, vectors }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn d(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn n(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn into_vectors(self) -> DMatrix<C64> {
        self.vectors
    }

    pub fn column(&self, j: usize) -> &[C64] {
        let d = self.d();
        &self.vectors.as_slice()[j * d..(j + 1) * d]
    }

    /// Reinterprets the frame over another field. Moving to the reals
    /// requires every entry to be real already.
    pub fn with_field(&self, field: Field) -> Result<Self> {
        check_entries(field, &self.vectors)?;
        Ok(UnitFrame {
            field,
            vectors: self.vectors.clone(),
        })
    }
}

fn check_entries(field: Field, vectors: &DMatrix<C64>) -> Result<()> {
    if vectors.nrows() == 0 || vectors.ncols() == 0 {
        return Err(Error::InvalidArgument(
            "frame must have d >= 1 and n >= 1".into(),
        ));
    }
    for (j, col) in vectors.column_iter().enumerate() {
        if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { column: j });
        }
        if field == Field::Real && col.iter().any(|z| z.im != 0.0) {
            return Err(Error::NotReal { column: j });
        }
    }
    Ok(())
}

/// `<x, y>`, conjugate-linear in `y`.
#[inline]
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Hermitian matrix of pairwise inner products, `entries[(j, k)] = <phi_k, phi_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<C64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[(j, k)]
    }

    /// Moduli of the strictly upper-triangular entries, row by row.
    pub fn off_diagonal_moduli(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for j in 0..n {
            for k in j + 1..n {
                out.push(self.entries[(j, k)].norm());
            }
        }
        out
    }

    /// Builds a Gram matrix from the upper triangle of `m`, mirroring it so
    /// the result is exactly Hermitian with real diagonal.
    pub(crate) fn from_upper(mut m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
            for k in j + 1..n {
                m[(k, j)] = m[(j, k)].conj();
            }
        }
        GramMatrix { entries: m }
    }
}

/// The Gram matrix of `frame` with diagonal set to exactly one.
pub fn gram(frame: &UnitFrame) -> GramMatrix {
    let n = frame.n();
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for j in 0..n {
        m[(j, j)] = C64::new(1.0, 0.0);
        let pj = frame.column(j);
        for k in j + 1..n {
            m[(j, k)] = inner(frame.column(k), pj);
        }
    }
    GramMatrix::from_upper(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_gram() {
        let f = UnitFrame::standard_basis(Field::Real, 2, 2).unwrap();
        assert_eq!(gram(&f).entries(), &DMatrix::<C64>::identity(2, 2));
    }

    #[test]
    fn diagonal_pair_gram() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = UnitFrame::from_real_columns(&[vec![1.0, 0.0], vec![s, s]]).unwrap();
        let g = gram(&f);
        assert!((g.get(0, 1).re - s).abs() < 1e-15);
        assert_eq!(g.get(1, 0), g.get(0, 1).conj());
    }

    #[test]
    fn gram_convention_is_conjugate_linear_in_second_slot() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let data = vec![c(1.0), c(0.0), C64::new(s, 0.0), C64::new(0.0, s)];
        let f = UnitFrame::from_column_major(Field::Complex, 2, 2, data).unwrap();
        let g = gram(&f);
        // <phi_2, phi_1> = s * conj(1) + i s * conj(0) = s
        assert!((g.get(0, 1) - C64::new(s, 0.0)).norm() < 1e-15);
        // <phi_1, phi_2> = 1 * conj(s) = s
        assert!((g.get(1, 0) - C64::new(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let err = UnitFrame::from_column_major(Field::Real, 2, 3, vec![c(1.0); 5]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn rejects_non_unit_columns_unless_normalizing() {
        let m = DMatrix::from_vec(2, 1, vec![c(2.0), c(0.0)]);
        assert!(matches!(
            UnitFrame::new(Field::Real, m.clone()),
            Err(Error::NotUnitNorm { column: 0, .. })
        ));
        let f = UnitFrame::normalized(Field::Real, m).unwrap();
        assert_eq!(f.column(0), &[c(1.0), c(0.0)]);
    }

    #[test]
    fn rejects_imaginary_parts_in_real_frames() {
        let m = DMatrix::from_vec(1, 1, vec![C64::new(0.0, 1.0)]);
        assert!(matches!(
            UnitFrame::new(Field::Real, m),
            Err(Error::NotReal { column: 0 })
        ));
    }

    #[test]
    fn zero_column_cannot_be_normalized() {
        let m = DMatrix::from_vec(2, 1, vec![c(0.0), c(0.0)]);
        assert!(matches!(
            UnitFrame::normalized(Field::Complex, m),
            Err(Error::ZeroColumn { column: 0 })
        ));
    }
}
