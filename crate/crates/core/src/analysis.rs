//! Certification-grade measurements of a frame.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundKind, SaturationClass};
use crate::error::{Error, Result};
use crate::frame::{gram, inner, Field, UnitFrame};
use crate::linalg;

/// Default single-linkage threshold for merging squared moduli.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Largest `|<phi_j, phi_k>|` over `j < k`.
pub fn coherence(frame: &UnitFrame) -> Result<f64> {
    if frame.n() < 2 {
        return Err(Error::InvalidArgument(format!(
            "coherence needs at least two vectors, got {}",
            frame.n()
        )));
    }
    Ok(coherence_unchecked(frame))
}

pub(crate) fn coherence_unchecked(frame: &UnitFrame) -> f64 {
    let n = frame.n();
    let mut best = 0.0f64;
    for j in 0..n {
        let pj = frame.column(j);
        for k in j + 1..n {
            best = best.max(inner(frame.column(k), pj).norm());
        }
    }
    best.min(1.0)
}

/// Distinct squared moduli of off-diagonal inner products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    pub cluster_tol: f64,
}

impl AngleProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True if every value is within `tol` of some element of `allowed`.
    pub fn subset_of(&self, allowed: &[f64], tol: f64) -> bool {
        self.values
            .iter()
            .all(|v| allowed.iter().any(|a| (v - a).abs() <= tol))
    }
}

/// Single-linkage clustering of the sorted squared moduli; each cluster is
/// reported by its mean.
pub fn angle_profile(frame: &UnitFrame, cluster_tol: f64) -> Result<AngleProfile> {
    if frame.n() < 2 {
        return Err(Error::InvalidArgument("angle profile needs n >= 2".into()));
    }
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "cluster_tol must be nonnegative".into(),
        ));
    }
    let mut squares: Vec<f64> = gram(frame)
        .off_diagonal_moduli()
        .into_iter()
        .map(|m| m * m)
        .collect();
    squares.sort_by(f64::total_cmp);

    let mut values = Vec::new();
    let mut counts = Vec::new();
    let mut sum = squares[0];
    let mut count = 1usize;
    let mut last = squares[0];
    for &s in &squares[1..] {
        if s - last <= cluster_tol {
            sum += s;
            count += 1;
        } else {
            values.push(sum / count as f64);
            counts.push(count);
            sum = s;
            count = 1;
        }
        last = s;
    }
    values.push(sum / count as f64);
    counts.push(count);
    Ok(AngleProfile {
        values,
        counts,
        cluster_tol,
    })
}

/// Extreme eigenvalues of the frame operator `Phi Phi^*`: the optimal frame
/// bounds `(A, B)`.
pub fn frame_bounds(frame: &UnitFrame) -> (f64, f64) {
    let eig = linalg::hermitian_eigen(&linalg::frame_operator(frame.vectors()), frame.field());
    (*eig.values.last().unwrap(), eig.values[0])
}

/// Relative spectral distance of `Phi Phi^*` from `(n/d) I`, and whether it
/// is within `tol`. Frames with `n < d` are never tight.
pub fn is_tight(frame: &UnitFrame, tol: f64) -> (bool, f64) {
    let (d, n) = (frame.d(), frame.n());
    if n < d {
        return (false, f64::INFINITY);
    }
    let scale = n as f64 / d as f64;
    let (a, b) = frame_bounds(frame);
    let residual = (a - scale).abs().max((b - scale).abs()) / scale;
    (residual <= tol, residual)
}

/// True if all off-diagonal moduli agree to within `tol`.
pub fn is_equiangular(frame: &UnitFrame, tol: f64) -> bool {
    if frame.n() < 2 {
        return true;
    }
    let moduli = gram(frame).off_diagonal_moduli();
    let (lo, hi) = moduli
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
            (lo.min(m), hi.max(m))
        });
    hi - lo <= tol
}

/// True if the `d`-th singular value exceeds `tol` times the largest.
pub fn spans(frame: &UnitFrame, tol: f64) -> bool {
    let d = frame.d();
    if frame.n() < d {
        return false;
    }
    let sv = linalg::singular_values(frame.vectors(), frame.field());
    sv.len() >= d && sv[d - 1] > tol * sv[0]
}

/// Tolerances used when certifying a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub cluster_tol: f64,
    pub tight_tol: f64,
    pub equiangular_tol: f64,
    pub span_tol: f64,
    /// Tolerance for matching coherence against a bound.
    pub saturation_tol: f64,
}

impl CertifyOptions {
    /// For exact constructions.
    pub fn exact() -> Self {
        CertifyOptions {
            cluster_tol: CLUSTER_TOL,
            tight_tol: 1e-8,
            equiangular_tol: 1e-8,
            span_tol: 1e-10,
            saturation_tol: 1e-8,
        }
    }

    /// For numerically optimized frames.
    pub fn numerical() -> Self {
        CertifyOptions {
            cluster_tol: CLUSTER_TOL,
            tight_tol: 1e-5,
            equiangular_tol: 1e-5,
            span_tol: 1e-10,
            saturation_tol: 1e-5,
        }
    }
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self::exact()
    }
}

/// Everything measured about a frame, in one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: usize,
    pub n: usize,
    pub field: Field,
    pub coherence: f64,
    pub angle_profile: AngleProfile,
    pub is_tight: bool,
    pub tightness_residual: f64,
    pub is_equiangular: bool,
    pub spans: bool,
    pub lower_bound: f64,
    pub saturated_bound: Option<BoundKind>,
    /// Set when a saturation label contradicts a necessary condition.
    pub diagnostic: Option<String>,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        self.coherence - self.lower_bound
    }
}

/// Measures `frame` and classifies which lower bound, if any, it meets.
pub fn certify(frame: &UnitFrame, opts: &CertifyOptions) -> Result<Certificate> {
    let (d, n) = (frame.d(), frame.n());
    let coherence = coherence(frame)?;
    let angle_profile = angle_profile(frame, opts.cluster_tol)?;
    let (is_tight, tightness_residual) = is_tight(frame, opts.tight_tol);
    let mut cert = Certificate {
        d,
        n,
        field: frame.field(),
        coherence,
        angle_profile,
        is_tight,
        tightness_residual,
        is_equiangular: is_equiangular(frame, opts.equiangular_tol),
        spans: spans(frame, opts.span_tol),
        lower_bound: bounds::best_lower_bound(d, n, frame.field()).best,
        saturated_bound: None,
        diagnostic: None,
    };
    let class = bounds::classify_saturation(&cert, opts.saturation_tol);
    cert.saturated_bound = match class.class {
        SaturationClass::Etf => Some(BoundKind::Welch),
        SaturationClass::OrthoplexSaturating => Some(BoundKind::Orthoplex),
        SaturationClass::LevensteinTightTwoDistance => Some(BoundKind::Levenstein),
        SaturationClass::None => None,
    };
    cert.diagnostic = class.diagnostic;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{mub_maximal, simplex};

    #[test]
    fn orthonormal_basis() {
        let f = UnitFrame::standard_basis(Field::Complex, 4, 4).unwrap();
        assert_eq!(coherence(&f).unwrap(), 0.0);
        let p = angle_profile(&f, CLUSTER_TOL).unwrap();
        assert_eq!(p.values, vec![0.0]);
        assert_eq!(p.counts, vec![6]);
        assert_eq!(is_tight(&f, 1e-12), (true, 0.0));
        assert!(is_equiangular(&f, 1e-12));
        assert!(spans(&f, 1e-10));
    }

    #[test]
    fn coherence_needs_two_vectors() {
        let f = UnitFrame::standard_basis(Field::Real, 2, 1).unwrap();
        assert!(coherence(&f).is_err());
    }

    #[test]
    fn simplex_profiles() {
        let f = simplex(3, Field::Complex);
        assert!((coherence(&f).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let p = angle_profile(&simplex(4, Field::Real), CLUSTER_TOL).unwrap();
        assert_eq!(p.counts, vec![10]);
        assert!((p.values[0] - 1.0 / 16.0).abs() < 1e-14);
        let (tight, residual) = is_tight(&f, 1e-12);
        assert!(tight && residual <= 1e-12);
        assert!(is_equiangular(&simplex(5, Field::Real), 1e-12));
    }

    #[test]
    fn mub_profiles() {
        let p = angle_profile(&mub_maximal(3).unwrap(), CLUSTER_TOL).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.values[0].abs() < 1e-12);
        assert!((p.values[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(!is_equiangular(&mub_maximal(2).unwrap(), 1e-8));
    }

    #[test]
    fn repeated_vector_is_not_tight_and_does_not_span() {
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        let f = UnitFrame::from_real_columns(&[e1.clone(), e1.clone(), e2]).unwrap();
        let (tight, residual) = is_tight(&f, 1e-8);
        assert!(!tight);
        // frame operator diag(2, 1) against 3/2
        assert!((residual - 1.0 / 3.0).abs() < 1e-14);
        let (a, b) = frame_bounds(&f);
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);

        let rank_one = UnitFrame::from_real_columns(&[e1.clone(), e1.clone(), e1]).unwrap();
        assert!(!spans(&rank_one, 1e-10));
    }

    #[test]
    fn fewer_vectors_than_dimension_cannot_be_tight() {
        let f = UnitFrame::standard_basis(Field::Real, 3, 2).unwrap();
        assert_eq!(is_tight(&f, 1.0), (false, f64::INFINITY));
    }

    #[test]
    fn clustering_merges_within_tolerance() {
        let s = (0.5f64).sqrt();
        let t = (0.5f64 + 1e-8).sqrt();
        let u = (1.0 - t * t).sqrt();
        let f =
            UnitFrame::from_real_columns(&[vec![1.0, 0.0, 0.0], vec![s, s, 0.0], vec![t, 0.0, u]])
                .unwrap();
        let p = angle_profile(&f, 1e-6).unwrap();
        assert_eq!(p.counts.iter().sum::<usize>(), 3);
        assert_eq!(p.len(), 2);
        let fine = angle_profile(&f, 1e-12).unwrap();
        assert_eq!(fine.len(), 3);
    }
}
