//! Numerical search for low-coherence packings.
//!
//! [`anneal`] runs independent restarts from random unit vectors. Each
//! restart minimizes the smoothed objective of [`surrogate`] by projected
//! gradient descent, doubling `beta` between rounds, and after every round
//! polishes its best iterate with alternating projection. Restarts run on the
//! rayon pool when the `parallel` feature is enabled; every restart draws
//! from its own `(seed, restart)` stream, so serial and parallel runs agree
//! bit for bit.

mod config;
mod descent;
mod escape;
mod projection;
pub mod surrogate;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::analysis::{certify, coherence_unchecked, is_tight, Certificate, CertifyOptions};
use crate::bounds::best_lower_bound;
use crate::error::{Error, Result};
use crate::frame::{Field, UnitFrame};
use crate::C64;

pub use config::SolverConfig;
pub use descent::{descent_round, NonFinite, RoundStats};
pub use escape::perturb_escape;
pub use projection::{alternating_projection, phase_quantize, tighten};
pub use surrogate::{smoothed_coherence, smoothed_objective, tangent_gradient};

/// Iterations per alternating-projection attempt during polishing.
const AP_ITERS: usize = 100;
/// Upper limit on successive shrink attempts per polish.
const AP_MAX_ATTEMPTS: usize = 50;
const ESCAPE_TRIALS: usize = 30;
const ESCAPE_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Restarts on the rayon pool; same as `Sequential` without the
    /// `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartOutcome {
    pub coherence: f64,
    pub iterations: usize,
    /// Set when the restart hit a non-finite surrogate and stopped early.
    pub aborted: bool,
    /// Best coherence after each round, non-increasing.
    pub round_coherences: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best_frame: UnitFrame,
    pub best_coherence: f64,
    pub best_restart: usize,
    pub certificate: Certificate,
    pub per_restart_coherences: Vec<f64>,
    pub restarts: Vec<RestartOutcome>,
    pub iterations_used: usize,
    pub gap_to_bound: f64,
}

/// Deterministic per-restart generator.
pub(crate) fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    rng
}

/// `n` independent Gaussian vectors scaled to the unit sphere.
pub fn random_frame<R: rand::Rng>(d: usize, n: usize, field: Field, rng: &mut R) -> UnitFrame {
    loop {
        let data: Vec<C64> = (0..d * n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = match field {
                    Field::Real => 0.0,
                    Field::Complex => StandardNormal.sample(rng),
                };
                C64::new(re, im)
            })
            .collect();
        if let Ok(f) = UnitFrame::normalized(field, DMatrix::from_vec(d, n, data)) {
            return f;
        }
    }
}

/// Runs the configured search with default execution and no warm start.
pub fn anneal(cfg: &SolverConfig) -> Result<SolveResult> {
    anneal_with(cfg, None, Execution::default())
}

/// Runs the configured search. A warm start, if given, replaces the random
/// initial frame of restart 0.
pub fn anneal_with(
    cfg: &SolverConfig,
    warm_start: Option<&UnitFrame>,
    execution: Execution,
) -> Result<SolveResult> {
    cfg.validate()?;
    if let Some(w) = warm_start {
        if (w.d(), w.n(), w.field()) != (cfg.d, cfg.n, cfg.field) {
            return Err(Error::Dimension {
                expected: format!("{} {} {}", cfg.field, cfg.d, cfg.n),
                found: format!("{} {} {}", w.field(), w.d(), w.n()),
            });
        }
    }
    let opts = CertifyOptions::numerical();
    if cfg.n <= cfg.d {
        let frame = UnitFrame::standard_basis(cfg.field, cfg.d, cfg.n)?;
        return finish(cfg, frame, 0, vec![degenerate_outcome(cfg.n)], &opts);
    }

    let run = |r: usize| run_restart(cfg, r, warm_start.filter(|_| r == 0));
    let outcomes: Vec<(UnitFrame, RestartOutcome)> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..cfg.restarts).into_par_iter().map(run).collect()
        }
        _ => (0..cfg.restarts).map(run).collect(),
    };

    // lowest coherence, then lowest restart index
    let (best_restart, _) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1 .1
                .coherence
                .total_cmp(&b.1 .1.coherence)
                .then(a.0.cmp(&b.0))
        })
        .expect("restarts >= 1");
    let mut frames: Vec<UnitFrame> = Vec::with_capacity(outcomes.len());
    let mut stats = Vec::with_capacity(outcomes.len());
    for (f, o) in outcomes {
        frames.push(f);
        stats.push(o);
    }
    let mut winner = frames.swap_remove(best_restart);

    // A vector whose maximal-angle neighbours do not span can always be moved.
    if !crate::analysis::spans(&winner, opts.span_tol) {
        winner = perturb_escape(&winner, ESCAPE_TRIALS, ESCAPE_STEP, cfg.seed);
        stats[best_restart].coherence = coherence_unchecked(&winner);
    }
    finish(cfg, winner, best_restart, stats, &opts)
}

fn degenerate_outcome(n: usize) -> RestartOutcome {
    RestartOutcome {
        coherence: 0.0,
        iterations: 0,
        aborted: false,
        round_coherences: if n >= 2 { vec![0.0] } else { vec![] },
    }
}

fn finish(
    cfg: &SolverConfig,
    frame: UnitFrame,
    best_restart: usize,
    restarts: Vec<RestartOutcome>,
    opts: &CertifyOptions,
) -> Result<SolveResult> {
    let certificate = if frame.n() >= 2 {
        certify(&frame, opts)?
    } else {
        return Err(Error::InvalidArgument("solving needs n >= 2".into()));
    };
    let best_coherence = certificate.coherence;
    Ok(SolveResult {
        gap_to_bound: best_coherence - best_lower_bound(cfg.d, cfg.n, cfg.field).best,
        per_restart_coherences: restarts.iter().map(|r| r.coherence).collect(),
        iterations_used: restarts.iter().map(|r| r.iterations).sum(),
        best_frame: frame,
        best_coherence,
        best_restart,
        certificate,
        restarts,
    })
}

/// One restart of the `beta` continuation.
fn run_restart(
    cfg: &SolverConfig,
    restart: usize,
    warm_start: Option<&UnitFrame>,
) -> (UnitFrame, RestartOutcome) {
    let mut rng = restart_rng(cfg.seed, restart as u64);
    let start = match warm_start {
        Some(f) => f.clone(),
        None => random_frame(cfg.d, cfg.n, cfg.field, &mut rng),
    };
    let prepare = |f: UnitFrame| if cfg.require_tight { tighten(&f) } else { f };
    let mut best = prepare(start);
    let mut best_mu = coherence_unchecked(&best);
    let mut outcome = RestartOutcome {
        coherence: best_mu,
        iterations: 0,
        aborted: false,
        round_coherences: Vec::with_capacity(cfg.beta_rounds),
    };
    let consider = |candidate: UnitFrame, best: &mut UnitFrame, best_mu: &mut f64| {
        if cfg.require_tight && !is_tight(&candidate, TIGHT_ACCEPT).0 {
            return;
        }
        let mu = coherence_unchecked(&candidate);
        if mu < *best_mu {
            *best = candidate;
            *best_mu = mu;
        }
    };

    let mut beta = cfg.beta_init;
    for _ in 0..cfg.beta_rounds {
        match descent_round(&best, beta, cfg) {
            Ok((next, stats)) => {
                outcome.iterations += stats.iterations;
                consider(prepare(next), &mut best, &mut best_mu);
            }
            Err(NonFinite) => {
                outcome.aborted = true;
                break;
            }
        }
        if cfg.ap_enabled {
            let polished = polish(&best, best_mu, cfg);
            consider(polished, &mut best, &mut best_mu);
        }
        outcome.round_coherences.push(best_mu);
        beta *= cfg.beta_growth;
    }

    if let Some(q) = cfg.phase_quantize_q {
        if cfg.field == Field::Complex {
            if let Ok(quantized) = phase_quantize(&best, q) {
                let quantized = prepare(quantized);
                consider(quantized.clone(), &mut best, &mut best_mu);
                if cfg.ap_enabled {
                    let mu = coherence_unchecked(&quantized);
                    consider(polish(&quantized, mu, cfg), &mut best, &mut best_mu);
                }
            }
        }
    }
    if cfg.perturb_escape {
        let escaped = perturb_escape(&best, ESCAPE_TRIALS, ESCAPE_STEP, cfg.seed ^ restart as u64);
        consider(prepare(escaped), &mut best, &mut best_mu);
    }
    outcome.coherence = best_mu;
    (best, outcome)
}

/// Tightness accepted for candidates in tight mode.
const TIGHT_ACCEPT: f64 = 1e-9;

/// Alternating projection with a shrinking target: start at
/// `mu * ap_shrink`, shrink again after each improvement, stop at the first
/// attempt that does not improve.
fn polish(frame: &UnitFrame, mu: f64, cfg: &SolverConfig) -> UnitFrame {
    let mut best = frame.clone();
    let mut best_mu = mu;
    for _ in 0..AP_MAX_ATTEMPTS {
        let target = best_mu * cfg.ap_shrink;
        let candidate = alternating_projection(&best, target, AP_ITERS, cfg.require_tight);
        let c = coherence_unchecked(&candidate);
        if c < best_mu {
            best = candidate;
            best_mu = c;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let a = random_frame(3, 4, Field::Complex, &mut restart_rng(9, 2));
        let _ = random_frame(3, 4, Field::Complex, &mut restart_rng(9, 1));
        let b = random_frame(3, 4, Field::Complex, &mut restart_rng(9, 2));
        assert_eq!(a, b);
        let c = random_frame(3, 4, Field::Complex, &mut restart_rng(9, 3));
        assert_ne!(a, c);
    }

    #[test]
    fn real_random_frames_are_real() {
        let f = random_frame(4, 6, Field::Real, &mut restart_rng(0, 0));
        assert!(f.vectors().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn square_problem_is_orthonormal() {
        for field in [Field::Real, Field::Complex] {
            let mut cfg = SolverConfig::new(4, 4, field);
            cfg.restarts = 2;
            let r = anneal(&cfg).unwrap();
            assert!(r.best_coherence <= 1e-8);
            assert!(r.certificate.spans);
        }
    }

    #[test]
    fn mercedes_benz_from_random_start() {
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        cfg.restarts = 4;
        cfg.seed = 11;
        let r = anneal(&cfg).unwrap();
        assert!(
            (r.best_coherence - 0.5).abs() < 1e-6,
            "{}",
            r.best_coherence
        );
        assert!(r.gap_to_bound >= -1e-10);
    }

    #[test]
    fn rounds_are_monotone() {
        let mut cfg = SolverConfig::new(3, 6, Field::Complex);
        cfg.restarts = 3;
        cfg.beta_rounds = 6;
        let r = anneal_with(&cfg, None, Execution::Sequential).unwrap();
        for o in &r.restarts {
            assert!(o.round_coherences.windows(2).all(|w| w[1] <= w[0]));
        }
        assert_eq!(
            r.best_coherence,
            r.per_restart_coherences
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        );
    }

    #[test]
    fn warm_start_must_match_shape() {
        let cfg = SolverConfig::new(3, 5, Field::Complex);
        let wrong = crate::constructions::simplex(3, Field::Complex);
        assert!(anneal_with(&cfg, Some(&wrong), Execution::Sequential).is_err());
    }
}
