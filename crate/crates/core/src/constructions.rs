//! Exact reference packings.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{coherence_unchecked, is_tight};
use crate::error::{Error, Result};
use crate::frame::{Field, UnitFrame};
use crate::linalg;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionKind {
    Simplex,
    MubMaximal,
    NaimarkComplement,
    ConjectureC3N5,
    Removal,
}

/// Identifies how a packing was built, with the catalog note it carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionLabel {
    pub kind: ConstructionKind,
    pub params: Vec<i64>,
    pub note: String,
}

impl ConstructionLabel {
    pub fn new(kind: ConstructionKind, params: Vec<i64>) -> Self {
        let note = match kind {
            ConstructionKind::Simplex | ConstructionKind::NaimarkComplement => "etf",
            ConstructionKind::MubMaximal => "mub",
            ConstructionKind::ConjectureC3N5 => "c3n5",
            ConstructionKind::Removal => "AUTO",
        };
        ConstructionLabel {
            kind,
            params,
            note: note.to_string(),
        }
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `d + 1` equiangular unit vectors in `F^d` with `|<phi_j, phi_k>| = 1/d`.
///
/// The rows are the Helmert basis of the sum-zero hyperplane of `R^(d+1)`,
/// i.e. an orthonormal basis of the top eigenspace of `I - J/(d+1)`; the
/// columns are then rescaled to unit norm.
pub fn simplex(d: usize, field: Field) -> UnitFrame {
    assert!(d >= 1, "simplex needs d >= 1");
    let n = d + 1;
    let mut m = DMatrix::from_element(d, n, re(0.0));
    for k in 1..=d {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for c in 0..k {
            m[(k - 1, c)] = re(scale);
        }
        m[(k - 1, k)] = re(-(k as f64) * scale);
    }
    linalg::normalize_columns(&mut m);
    UnitFrame::from_normalized(field, m)
}

fn is_prime(d: usize) -> bool {
    d >= 2
        && (2..)
            .take_while(|p| p * p <= d)
            .all(|p| !d.is_multiple_of(p))
}

/// The standard basis followed by `d` quadratic-phase Fourier bases:
/// `v_{a,b}[x] = omega^(a x^2 + b x) / sqrt(d)` with `omega = exp(2 pi i / d)`.
/// For `d = 2` the three Pauli eigenbases are used.
pub fn mub_maximal(d: usize) -> Result<UnitFrame> {
    if !is_prime(d) {
        return Err(Error::Unsupported(format!(
            "maximal MUB construction needs prime d, got {d}"
        )));
    }
    let n = d * (d + 1);
    let mut m = DMatrix::from_element(d, n, re(0.0));
    for j in 0..d {
        m[(j, j)] = re(1.0);
    }
    if d == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cols = [
            [re(s), re(s)],
            [re(s), re(-s)],
            [re(s), C64::new(0.0, s)],
            [re(s), C64::new(0.0, -s)],
        ];
        for (c, col) in cols.iter().enumerate() {
            m[(0, 2 + c)] = col[0];
            m[(1, 2 + c)] = col[1];
        }
    } else {
        let scale = 1.0 / (d as f64).sqrt();
        for a in 0..d {
            for b in 0..d {
                let col = d + a * d + b;
                for x in 0..d {
                    // exponent reduced mod d before scaling keeps the phase exact
                    let e = (a * x * x + b * x) % d;
                    let theta = 2.0 * PI * e as f64 / d as f64;
                    m[(x, col)] = C64::from_polar(scale, theta);
                }
            }
        }
    }
    linalg::normalize_columns(&mut m);
    Ok(UnitFrame::from_normalized(Field::Complex, m))
}

/// The Naimark complement of a tight frame: `n` unit vectors in `F^(n-d)`
/// spanning the orthogonal complement of the row space of
/// `sqrt(d/n) Phi` inside `F^n`. Each output column is scaled to unit norm
/// and rotated so its first nonzero entry is positive real.
pub fn naimark_complement(frame: &UnitFrame) -> Result<UnitFrame> {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    if n <= d {
        return Err(Error::Precondition(format!(
            "Naimark complement needs n > d, got n = {n}, d = {d}"
        )));
    }
    let (tight, residual) = is_tight(frame, 1e-8);
    if !tight {
        return Err(Error::Precondition(format!(
            "Naimark complement needs a tight frame (relative residual {residual:e})"
        )));
    }
    let k = n - d;
    // Projector onto the complement of the (orthonormal) rows of sqrt(d/n) Phi.
    let scale = d as f64 / n as f64;
    let mut proj = -(frame.vectors().adjoint() * frame.vectors()) * re(scale);
    for j in 0..n {
        proj[(j, j)] += re(1.0);
    }
    let proj = linalg::hermitian_part(&proj);
    let mut m = linalg::leading_factor(&proj, k, field, Some(1.0));
    if field == Field::Real {
        linalg::make_real(&mut m);
    }
    if !linalg::normalize_columns(&mut m) {
        return Err(Error::Precondition(
            "Naimark complement produced a zero column".into(),
        ));
    }
    for mut col in m.column_iter_mut() {
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    if field == Field::Real {
        linalg::make_real(&mut m);
    }
    Ok(UnitFrame::from_normalized(field, m))
}

/// Five unit vectors in `C^3`, conjectured to be an optimal packing:
///
/// ```text
/// [ a  b  b  c     c    ]
/// [ b  a  b  c w   c w^2]
/// [ b  b  a  c w^2 c w  ]
/// ```
///
/// with `a = (sqrt 13 + sqrt(2 + sqrt 13) - 1) / (3 sqrt 3)`,
/// `b = sqrt((1 - a^2) / 2)`, `c = 1/sqrt 3` and `w = exp(2 pi i / 3)`.
pub fn conjecture_c3n5() -> UnitFrame {
    let s13 = 13f64.sqrt();
    let a = (s13 + (2.0 + s13).sqrt() - 1.0) / (3.0 * 3f64.sqrt());
    let b = ((1.0 - a * a) / 2.0).sqrt();
    let c = 1.0 / 3f64.sqrt();
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = C64::from_polar(1.0, 4.0 * PI / 3.0);
    #[rustfmt::skip]
    let rows = [
        [re(a), re(b), re(b), re(c),  re(c)],
        [re(b), re(a), re(b), w * c,  w2 * c],
        [re(b), re(b), re(a), w2 * c, w * c],
    ];
    let m = DMatrix::from_fn(3, 5, |r, col| rows[r][col]);
    UnitFrame::from_normalized(Field::Complex, m)
}

/// Drops column `j` (zero-based).
pub fn remove_vector(frame: &UnitFrame, j: usize) -> Result<UnitFrame> {
    let n = frame.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "cannot remove a vector from a frame with fewer than two".into(),
        ));
    }
    if j >= n {
        return Err(Error::InvalidArgument(format!(
            "index {j} out of range for {n} vectors"
        )));
    }
    Ok(UnitFrame::from_normalized(
        frame.field(),
        frame.vectors().clone().remove_column(j),
    ))
}

/// Tries every single-vector removal and keeps the one of least coherence,
/// preferring the smallest index on ties.
pub fn best_removal(frame: &UnitFrame) -> Result<(UnitFrame, usize)> {
    if frame.n() < 3 {
        return Err(Error::InvalidArgument(format!(
            "best removal needs at least three vectors, got {}",
            frame.n()
        )));
    }
    let mut best: Option<(UnitFrame, usize, f64)> = None;
    for j in 0..frame.n() {
        let candidate = remove_vector(frame, j)?;
        let mu = coherence_unchecked(&candidate);
        if best.as_ref().is_none_or(|(_, _, b)| mu < *b) {
            best = Some((candidate, j, mu));
        }
    }
    let (f, j, _) = best.expect("n >= 3");
    Ok((f, j))
}
