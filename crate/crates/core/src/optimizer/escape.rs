//! Local escape moves for vectors whose closest neighbours fail to span.
//!
//! If the vectors at maximal angle to `phi_j` span a proper subspace, moving
//! `phi_j` along a unit `v` orthogonal to that subspace leaves each of those
//! inner products unchanged while the norm of `phi_j + t v` grows to at least
//! `sqrt(1 + t^2)`, so after renormalization all of them shrink.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::coherence_unchecked;
use crate::frame::{inner, Field, UnitFrame};
use crate::C64;

/// Inner products within this distance of the coherence count as maximal.
const ACTIVE_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;

/// Tries to reduce the coherence by moving vectors off the span of their
/// maximal-angle neighbours. Each vector is tried with up to `trials` step
/// sizes `step, step/2, step/4, ...`; a move is kept if it lowers the largest
/// inner product involving that vector without raising the coherence.
/// Vectors are visited in an order shuffled by `rng_seed`.
pub fn perturb_escape(frame: &UnitFrame, trials: usize, step: f64, rng_seed: u64) -> UnitFrame {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    if n < 2 {
        return frame.clone();
    }
    let mut current = frame.clone();
    let mut mu = coherence_unchecked(&current);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));

    for &j in &order {
        let pj = current.column(j).to_vec();
        let neighbours: Vec<usize> = (0..n)
            .filter(|&k| k != j && inner(current.column(k), &pj).norm() >= mu - ACTIVE_TOL)
            .collect();
        if neighbours.is_empty() {
            continue;
        }
        let basis: Vec<Vec<C64>> = neighbours
            .iter()
            .map(|&k| current.column(k).to_vec())
            .collect();
        let Some(mut v) = orthogonal_direction(&basis, d, field) else {
            continue;
        };
        if inner(&pj, &v).re < 0.0 {
            v.iter_mut().for_each(|z| *z = -*z);
        }
        let local_max = |m: &nalgebra::DMatrix<C64>, col: &[C64]| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| inner(&m.as_slice()[k * d..(k + 1) * d], col).norm())
                .fold(0.0, f64::max)
        };
        let before = local_max(current.vectors(), &pj);
        let mut t = step;
        for _ in 0..trials {
            let mut moved: Vec<C64> = pj.iter().zip(&v).map(|(a, b)| a + b * t).collect();
            let norm = moved.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            moved.iter_mut().for_each(|z| *z /= norm);
            let after = local_max(current.vectors(), &moved);
            if after < before {
                let mut m = current.vectors().clone();
                m.as_mut_slice()[j * d..(j + 1) * d].copy_from_slice(&moved);
                let candidate = UnitFrame::from_normalized(field, m);
                let new_mu = coherence_unchecked(&candidate);
                if new_mu <= mu {
                    current = candidate;
                    mu = new_mu;
                    break;
                }
            }
            t *= 0.5;
        }
    }
    current
}

/// A unit vector orthogonal to every vector in `basis`, or `None` if they
/// span `F^d`. Found by Gram–Schmidt against the standard basis, so real
/// inputs give a real answer.
fn orthogonal_direction(basis: &[Vec<C64>], d: usize, field: Field) -> Option<Vec<C64>> {
    let mut ortho: Vec<Vec<C64>> = Vec::new();
    for b in basis {
        if let Some(u) = residual(b, &ortho) {
            ortho.push(u);
        }
    }
    if ortho.len() >= d {
        return None;
    }
    let mut best: Option<(Vec<C64>, f64)> = None;
    for i in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[i] = C64::new(1.0, 0.0);
        let r = subtract_projections(&e, &ortho);
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(_, b)| norm > *b) {
            best = Some((r, norm));
        }
    }
    let (mut r, norm) = best?;
    if norm < RANK_TOL {
        return None;
    }
    r.iter_mut().for_each(|z| *z /= norm);
    if field == Field::Real {
        r.iter_mut().for_each(|z| z.im = 0.0);
    }
    Some(r)
}

fn subtract_projections(x: &[C64], ortho: &[Vec<C64>]) -> Vec<C64> {
    let mut r = x.to_vec();
    for u in ortho {
        let c = inner(&r, u);
        for (ri, ui) in r.iter_mut().zip(u) {
            *ri -= ui * c;
        }
    }
    r
}

fn residual(x: &[C64], ortho: &[Vec<C64>]) -> Option<Vec<C64>> {
    let mut r = subtract_projections(x, ortho);
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (norm > RANK_TOL).then(|| {
        r.iter_mut().for_each(|z| *z /= norm);
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::coherence;
    use crate::constructions::simplex;

    #[test]
    fn spanning_neighbourhoods_are_left_alone() {
        let f = simplex(3, Field::Real);
        assert_eq!(perturb_escape(&f, 10, 0.1, 0), f);
    }

    #[test]
    fn non_spanning_frame_improves() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = UnitFrame::from_real_columns(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![s, s, 0.0],
        ])
        .unwrap();
        let out = perturb_escape(&f, 10, 0.5, 1);
        assert_eq!(out.field(), Field::Real);
        assert!(coherence(&out).unwrap() < s - 1e-6);
    }

    #[test]
    fn repeated_vector_separates() {
        let f = UnitFrame::from_real_columns(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let out = perturb_escape(&f, 10, 0.5, 0);
        assert!(coherence(&out).unwrap() < 1.0);
    }
}
