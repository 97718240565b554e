use crate::frame::{Field, UnitFrame};
use crate::C64;

use super::surrogate::{objective, objective_and_gradient, project_tangent};
use super::SolverConfig;

/// Smallest step tried before a round gives up on further decrease.
const MIN_STEP: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats {
    pub iterations: usize,
    pub objective: f64,
    pub gradient_norm: f64,
}

/// The surrogate became NaN or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFinite;

/// Projected gradient descent on `F_beta` over the product of unit spheres.
///
/// Each iteration steps against the tangent gradient, renormalizes every
/// column, and halves the step until the surrogate decreases. An accepted
/// step is doubled (up to `step_init`) for the next iteration. Stops after
/// `max_iters_per_round` iterations, once the tangent gradient norm drops to
/// `grad_tol`, or when no step above `MIN_STEP` decreases the surrogate.
pub fn descent_round(
    frame: &UnitFrame,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<(UnitFrame, RoundStats), NonFinite> {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    let mut x: Vec<C64> = frame.vectors().as_slice().to_vec();
    if n < 2 {
        return Ok((
            frame.clone(),
            RoundStats {
                iterations: 0,
                objective: 0.0,
                gradient_norm: 0.0,
            },
        ));
    }
    let mut grad = vec![C64::new(0.0, 0.0); d * n];
    let mut trial = vec![C64::new(0.0, 0.0); d * n];
    let mut value = gradient_at(&x, d, n, beta, field, &mut grad);
    if !value.is_finite() {
        return Err(NonFinite);
    }
    let mut step = cfg.step_init;
    let mut iterations = 0;
    let mut gnorm = norm(&grad);

    while iterations < cfg.max_iters_per_round && gnorm > cfg.grad_tol {
        let mut accepted = false;
        while step >= MIN_STEP {
            for i in 0..x.len() {
                trial[i] = x[i] - grad[i] * step;
            }
            normalize(&mut trial, d);
            let v = objective(&trial, d, n, beta);
            if !v.is_finite() {
                return Err(NonFinite);
            }
            if v < value {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        std::mem::swap(&mut x, &mut trial);
        value = gradient_at(&x, d, n, beta, field, &mut grad);
        gnorm = norm(&grad);
        iterations += 1;
        step = (step * 2.0).min(cfg.step_init);
    }

    let m = nalgebra::DMatrix::from_vec(d, n, x);
    Ok((
        UnitFrame::from_normalized(field, m),
        RoundStats {
            iterations,
            objective: value,
            gradient_norm: gnorm,
        },
    ))
}

fn gradient_at(x: &[C64], d: usize, n: usize, beta: f64, field: Field, grad: &mut [C64]) -> f64 {
    let v = objective_and_gradient(x, d, n, beta, grad);
    project_tangent(x, d, n, grad);
    if field == Field::Real {
        grad.iter_mut().for_each(|g| g.im = 0.0);
    }
    v
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [C64], d: usize) {
    for col in x.chunks_mut(d) {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|z| *z /= norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::coherence;
    use crate::optimizer::surrogate::smoothed_objective;

    #[test]
    fn orthonormal_input_is_fixed() {
        let f = UnitFrame::standard_basis(Field::Complex, 3, 3).unwrap();
        let cfg = SolverConfig::new(3, 3, Field::Complex);
        let (out, stats) = descent_round(&f, 50.0, &cfg).unwrap();
        assert_eq!(out, f);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn never_increases_the_surrogate() {
        let cfg = SolverConfig::new(3, 7, Field::Complex);
        let f = crate::optimizer::random_frame(
            3,
            7,
            Field::Complex,
            &mut super::super::restart_rng(1, 0),
        );
        for beta in [10.0, 1000.0] {
            let (out, _) = descent_round(&f, beta, &cfg).unwrap();
            assert!(
                smoothed_objective(&out, beta).unwrap() <= smoothed_objective(&f, beta).unwrap()
            );
            assert!(coherence(&out).unwrap() <= 1.0);
        }
    }
}
