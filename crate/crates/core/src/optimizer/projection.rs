//! Gram-matrix projections: alternating projection toward a coherence
//! target, frame-operator balancing for tight frames, and phase quantization.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::analysis::coherence_unchecked;
use crate::error::{Error, Result};
use crate::frame::{gram, Field, UnitFrame};
use crate::linalg;
use crate::C64;

/// Iterations without a new best before alternating projection stops.
const STAGNATION: usize = 20;
const TIGHTEN_TOL: f64 = 1e-12;
const TIGHTEN_MAX_ITERS: usize = 5000;

/// Alternates between Gram matrices with unit diagonal and off-diagonal
/// moduli at most `target_mu`, and Gram matrices of rank `d`. In tight mode
/// the kept eigenvalues are all set to `n/d` and each iterate is balanced
/// with [`tighten`], so every iterate is a unit-norm tight frame.
///
/// Returns the iterate of least coherence (the input counts as an iterate
/// unless `require_tight` is set).
pub fn alternating_projection(
    frame: &UnitFrame,
    target_mu: f64,
    iters: usize,
    require_tight: bool,
) -> UnitFrame {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    if n < 2 {
        return frame.clone();
    }
    let fixed = require_tight.then(|| n as f64 / d as f64);
    let mut current = frame.clone();
    let mut best: Option<(UnitFrame, f64)> =
        (!require_tight).then(|| (frame.clone(), coherence_unchecked(frame)));
    let mut since_best = 0;

    for _ in 0..iters {
        let mut g = gram(&current).entries().clone();
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    g[(j, j)] = C64::new(1.0, 0.0);
                } else {
                    let m = g[(j, k)].norm();
                    if m > target_mu {
                        g[(j, k)] *= target_mu / m;
                    }
                }
            }
        }
        let Some(next) = factor_to_frame(&g, d, field, fixed) else {
            break;
        };
        let next = if require_tight { tighten(&next) } else { next };
        let mu = coherence_unchecked(&next);
        if best.as_ref().is_none_or(|(_, b)| mu < *b) {
            best = Some((next.clone(), mu));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION {
                break;
            }
        }
        current = next;
    }
    best.map_or(current, |(f, _)| f)
}

/// Rank-`d` factor of a Hermitian matrix with columns normalized.
fn factor_to_frame(
    g: &DMatrix<C64>,
    d: usize,
    field: Field,
    fixed: Option<f64>,
) -> Option<UnitFrame> {
    let mut m = linalg::leading_factor(g, d, field, fixed);
    if field == Field::Real {
        linalg::make_real(&mut m);
    }
    linalg::normalize_columns(&mut m).then(|| UnitFrame::from_normalized(field, m))
}

/// Balances a spanning frame toward a unit-norm tight frame by alternating
/// `Phi <- sqrt(n/d) (Phi Phi^*)^(-1/2) Phi` with column normalization.
/// Frames that do not span, or have `n < d`, are returned unchanged.
pub fn tighten(frame: &UnitFrame) -> UnitFrame {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    if n < d {
        return frame.clone();
    }
    let scale = n as f64 / d as f64;
    let mut m = frame.vectors().clone();
    for _ in 0..TIGHTEN_MAX_ITERS {
        let s = linalg::frame_operator(&m);
        let eig = linalg::hermitian_eigen(&s, field);
        let (lo, hi) = (*eig.values.last().unwrap(), eig.values[0]);
        if !(lo > 1e-12 * hi) {
            return frame.clone();
        }
        if (hi - scale).abs().max((lo - scale).abs()) / scale <= TIGHTEN_TOL {
            break;
        }
        let inv_sqrt = DMatrix::from_fn(d, d, |r, c| {
            (0..d)
                .map(|i| {
                    eig.vectors[(r, i)]
                        * eig.vectors[(c, i)].conj()
                        * (scale / eig.values[i]).sqrt()
                })
                .sum::<C64>()
        });
        m = inv_sqrt * m;
        if field == Field::Real {
            linalg::make_real(&mut m);
        }
        if !linalg::normalize_columns(&mut m) {
            return frame.clone();
        }
    }
    UnitFrame::from_normalized(field, m)
}

/// Rounds every off-diagonal Gram phase to the nearest `q`-th root of unity,
/// projects back to rank `d`, and renormalizes. The result is returned
/// whether or not the coherence improved.
pub fn phase_quantize(frame: &UnitFrame, q: u32) -> Result<UnitFrame> {
    if frame.field() == Field::Real {
        return Err(Error::Unsupported(
            "phase quantization needs a complex frame".into(),
        ));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let n = frame.n();
    let mut g = gram(frame).entries().clone();
    let qf = q as f64;
    for j in 0..n {
        for k in j + 1..n {
            let z = g[(j, k)];
            let theta = z.arg();
            let snapped = (qf * theta / (2.0 * PI)).round() * 2.0 * PI / qf;
            let w = C64::from_polar(z.norm(), snapped);
            g[(j, k)] = w;
            g[(k, j)] = w.conj();
        }
    }
    factor_to_frame(&g, frame.d(), Field::Complex, None)
        .ok_or_else(|| Error::Precondition("quantized Gram matrix has a zero column".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{coherence, is_tight};
    use crate::constructions::{mub_maximal, simplex};
    use crate::optimizer::{random_frame, restart_rng};

    #[test]
    fn etf_is_a_fixed_point() {
        let f = simplex(4, Field::Complex);
        let out = alternating_projection(&f, 0.25, 50, false);
        assert!((coherence(&out).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tight_mode_yields_tight_frames() {
        let f = random_frame(3, 6, Field::Complex, &mut restart_rng(7, 0));
        let out = alternating_projection(&f, 0.3, 100, true);
        assert!(is_tight(&out, 1e-6).0, "{}", is_tight(&out, 1e-6).1);
    }

    #[test]
    fn tighten_balances_random_frames() {
        for field in [Field::Real, Field::Complex] {
            let f = random_frame(4, 9, field, &mut restart_rng(3, 2));
            let t = tighten(&f);
            assert_eq!(t.field(), field);
            assert!(is_tight(&t, 1e-10).0);
        }
    }

    #[test]
    fn quantizing_mub_phases_is_harmless() {
        // cross-basis phases are i * omega^k, i.e. twelfth roots of unity
        let f = mub_maximal(3).unwrap();
        let out = phase_quantize(&f, 12).unwrap();
        assert_eq!((out.d(), out.n()), (3, 12));
        assert!((coherence(&out).unwrap() - coherence(&f).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn quantizing_real_simplex_with_q2() {
        let f = simplex(3, Field::Complex);
        let out = phase_quantize(&f, 2).unwrap();
        assert!((coherence(&out).unwrap() - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn quantizing_real_field_is_unsupported() {
        assert!(matches!(
            phase_quantize(&simplex(3, Field::Real), 2),
            Err(Error::Unsupported(_))
        ));
    }
}
