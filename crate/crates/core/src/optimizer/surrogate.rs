//! Log-sum-exp smoothing of the squared coherence.
//!
//! For inverse temperature `beta`,
//!
//! ```text
//! F_beta(Phi) = 1/(2 beta) * log sum_{j<k} exp(beta |<phi_j, phi_k>|^2)
//! ```
//!
//! and `mu^2 <= 2 F_beta <= mu^2 + log(n (n - 1) / 2) / beta`, so
//! `sqrt(2 F_beta)` tends to the coherence as `beta` grows.

use crate::error::{Error, Result};
use crate::frame::{inner, UnitFrame};
use crate::C64;

/// `F_beta` evaluated on raw column-major data (columns need not be unit).
pub(crate) fn objective(data: &[C64], d: usize, n: usize, beta: f64) -> f64 {
    let mut squares = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        let pj = &data[j * d..(j + 1) * d];
        for k in j + 1..n {
            squares.push(inner(&data[k * d..(k + 1) * d], pj).norm_sqr());
        }
    }
    log_sum_exp(&squares, beta) / (2.0 * beta)
}

fn log_sum_exp(squares: &[f64], beta: f64) -> f64 {
    let top = squares.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = squares.iter().map(|&s| (beta * (s - top)).exp()).sum();
    beta * top + sum.ln()
}

/// `F_beta` and its Euclidean gradient, one `d`-vector per column, written
/// into `grad`. The gradient of column `j` is
/// `(1/S) sum_{k != j} w_jk <phi_j, phi_k> phi_k` with softmax weights `w/S`.
pub(crate) fn objective_and_gradient(
    data: &[C64],
    d: usize,
    n: usize,
    beta: f64,
    grad: &mut [C64],
) -> f64 {
    let pairs = n * (n - 1) / 2;
    let mut ips = Vec::with_capacity(pairs);
    let mut top = f64::NEG_INFINITY;
    for j in 0..n {
        let pj = &data[j * d..(j + 1) * d];
        for k in j + 1..n {
            // <phi_j, phi_k>
            let c = inner(pj, &data[k * d..(k + 1) * d]);
            top = top.max(c.norm_sqr());
            ips.push(c);
        }
    }
    let mut weights = Vec::with_capacity(pairs);
    let mut total = 0.0;
    for c in &ips {
        let w = (beta * (c.norm_sqr() - top)).exp();
        total += w;
        weights.push(w);
    }
    grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
    let mut idx = 0;
    for j in 0..n {
        for k in j + 1..n {
            let w = weights[idx] / total;
            let c = ips[idx];
            idx += 1;
            if w == 0.0 {
                continue;
            }
            // column j gains w <phi_j, phi_k> phi_k, column k gains w <phi_k, phi_j> phi_j
            let cj = c * w;
            let ck = c.conj() * w;
            for i in 0..d {
                let (xj, xk) = (data[j * d + i], data[k * d + i]);
                grad[j * d + i] += cj * xk;
                grad[k * d + i] += ck * xj;
            }
        }
    }
    (beta * top + total.ln()) / (2.0 * beta)
}

/// Removes from each gradient column its real-inner-product component along
/// the (unit) column of `data`, landing in the sphere's tangent space.
pub(crate) fn project_tangent(data: &[C64], d: usize, n: usize, grad: &mut [C64]) {
    for j in 0..n {
        let x = &data[j * d..(j + 1) * d];
        let g = &mut grad[j * d..(j + 1) * d];
        let along: f64 = x.iter().zip(g.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi -= xi * along;
        }
    }
}

fn check(frame: &UnitFrame, beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    if frame.n() < 2 {
        return Err(Error::InvalidArgument("smoothing needs n >= 2".into()));
    }
    Ok(())
}

/// `F_beta(Phi)`, the quantity minimized by descent.
pub fn smoothed_objective(frame: &UnitFrame, beta: f64) -> Result<f64> {
    check(frame, beta)?;
    Ok(objective(
        frame.vectors().as_slice(),
        frame.d(),
        frame.n(),
        beta,
    ))
}

/// `sqrt(2 F_beta(Phi))`: an upper estimate of the coherence that converges
/// to it as `beta -> infinity`.
pub fn smoothed_coherence(frame: &UnitFrame, beta: f64) -> Result<f64> {
    Ok((2.0 * smoothed_objective(frame, beta)?).sqrt())
}

/// Riemannian gradient of `F_beta` on the product of unit spheres, as a
/// `d x n` column-major array.
pub fn tangent_gradient(frame: &UnitFrame, beta: f64) -> Result<Vec<C64>> {
    check(frame, beta)?;
    let (d, n) = (frame.d(), frame.n());
    let data = frame.vectors().as_slice();
    let mut grad = vec![C64::new(0.0, 0.0); d * n];
    objective_and_gradient(data, d, n, beta, &mut grad);
    project_tangent(data, d, n, &mut grad);
    if frame.field() == crate::Field::Real {
        grad.iter_mut().for_each(|g| g.im = 0.0);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::simplex;
    use crate::Field;

    #[test]
    fn orthonormal_value() {
        let f = UnitFrame::standard_basis(Field::Complex, 4, 4).unwrap();
        for beta in [1.0, 10.0, 1e3] {
            let v = smoothed_objective(&f, beta).unwrap();
            assert!((v - 6f64.ln() / (2.0 * beta)).abs() < 1e-15);
        }
    }

    #[test]
    fn equiangular_limit() {
        let f = simplex(4, Field::Real);
        let v = smoothed_coherence(&f, 1e6).unwrap();
        assert!((v - 0.25).abs() < 1e-4);
    }

    #[test]
    fn simplex_sandwich() {
        let f = simplex(3, Field::Complex);
        let mu2 = 1.0 / 9.0;
        let pairs = 6f64;
        for beta in [10.0, 100.0, 1000.0] {
            let two_f = 2.0 * smoothed_objective(&f, beta).unwrap();
            assert!(mu2 <= two_f + 1e-15);
            assert!(two_f <= mu2 + pairs.ln() / beta + 1e-15);
        }
    }

    #[test]
    fn value_matches_gradient_routine() {
        let f = simplex(5, Field::Complex);
        let mut g = vec![C64::new(0.0, 0.0); 30];
        let a = objective_and_gradient(f.vectors().as_slice(), 5, 6, 37.0, &mut g);
        let b = objective(f.vectors().as_slice(), 5, 6, 37.0);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_on_orthonormal_basis() {
        let f = UnitFrame::standard_basis(Field::Real, 3, 3).unwrap();
        let g = tangent_gradient(&f, 50.0).unwrap();
        assert!(g.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = simplex(2, Field::Real);
        assert!(smoothed_objective(&f, 0.0).is_err());
        let one = UnitFrame::standard_basis(Field::Real, 2, 1).unwrap();
        assert!(smoothed_objective(&one, 1.0).is_err());
    }
}
