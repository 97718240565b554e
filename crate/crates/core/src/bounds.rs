//! Lower bounds on the coherence of `n` unit vectors in `F^d`.
//!
//! With `m = 1/2` over the reals and `m = 1` over the complex numbers, and
//! Gerzon's bound `Z(d, F)`, any `n` unit vectors satisfy
//!
//! ```text
//! mu >= Z(n-d) / (n (1 + m (n-d-1) sqrt(1/m + n-d)) - Z(n-d))   n > d      (Bukh-Cox)
//! mu >= sqrt((n-d) / (d (n-1)))                                 n > d      (Welch)
//! mu >= 1 / sqrt(d)                                             n > Z(d)   (orthoplex)
//! mu >= sqrt((n (m+1) - d (m d + 1)) / ((n-d) (m d + 1)))       n > Z(d)   (Levenstein)
//! ```
//!
//! Welch equality holds exactly for equiangular tight frames; Levenstein
//! equality needs a tight frame whose squared moduli lie in `{0, mu^2}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::Certificate;
use crate::error::{Error, Result};
use crate::frame::Field;

/// Values closer than this are treated as tied when naming the best bound.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    BukhCox,
    Welch,
    Orthoplex,
    Levenstein,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::BukhCox,
        BoundKind::Welch,
        BoundKind::Orthoplex,
        BoundKind::Levenstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::BukhCox => "BukhCox",
            BoundKind::Welch => "Welch",
            BoundKind::Orthoplex => "Orthoplex",
            BoundKind::Levenstein => "Levenstein",
        }
    }

    /// Preference when two bounds tie: the bound with a known equality
    /// characterization wins, so `n = d + 1` reports Welch and the
    /// orthoplex/Levenstein meeting point reports orthoplex.
    fn tie_rank(self) -> u8 {
        match self {
            BoundKind::Welch => 0,
            BoundKind::Orthoplex => 1,
            BoundKind::BukhCox => 2,
            BoundKind::Levenstein => 3,
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Gerzon's bound: `d^2` over C, `d (d + 1) / 2` over R.
pub fn gerzon(d: usize, field: Field) -> usize {
    match field {
        Field::Complex => d * d,
        Field::Real => d * (d + 1) / 2,
    }
}

fn gerzon_continuous(k: f64, field: Field) -> f64 {
    match field {
        Field::Complex => k * k,
        Field::Real => k * (k + 1.0) / 2.0,
    }
}

fn bukh_cox_continuous(d: f64, n: f64, field: Field) -> f64 {
    let m = field.m();
    let k = n - d;
    let z = gerzon_continuous(k, field);
    z / (n * (1.0 + m * (k - 1.0) * (1.0 / m + k).sqrt()) - z)
}

fn welch_continuous(d: f64, n: f64) -> f64 {
    ((n - d) / (d * (n - 1.0))).sqrt()
}

fn levenstein_unchecked(d: usize, n: usize, field: Field) -> f64 {
    let m = field.m();
    let (d, n) = (d as f64, n as f64);
    let md1 = m * d + 1.0;
    ((n * (m + 1.0) - d * md1) / ((n - d) * md1)).sqrt()
}

pub fn bukh_cox(d: usize, n: usize, field: Field) -> Result<f64> {
    if n <= d || d < 1 {
        return Err(Error::Inapplicable {
            bound: "Bukh-Cox",
            d,
            n,
            reason: "requires n > d",
        });
    }
    Ok(bukh_cox_continuous(d as f64, n as f64, field))
}

pub fn welch(d: usize, n: usize) -> Result<f64> {
    if n <= d || d < 1 {
        return Err(Error::Inapplicable {
            bound: "Welch",
            d,
            n,
            reason: "requires n > d",
        });
    }
    Ok(welch_continuous(d as f64, n as f64))
}

/// `1 / sqrt(d)`, independent of `n`. Callers gate on `n > Z(d, F)`.
pub fn orthoplex(d: usize) -> f64 {
    1.0 / (d as f64).sqrt()
}

/// The Levenstein bound. It holds for `n > Z(d, F)`; at `n = Z(d, F)` the
/// formula is still evaluated (it then coincides with the Welch bound) but
/// is not a theorem there, and [`BoundReport`] keeps it apart.
pub fn levenstein(d: usize, n: usize, field: Field) -> Result<f64> {
    if n < gerzon(d, field) || n <= d {
        return Err(Error::Inapplicable {
            bound: "Levenstein",
            d,
            n,
            reason: "requires n > Z(d, F)",
        });
    }
    Ok(levenstein_unchecked(d, n, field))
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Welch's bound on `mu^(2t)`, returned as a bound on `mu`, clamped at zero
/// when `n` does not exceed `binom(d + t - 1, t)`.
pub fn generalized_welch(d: usize, n: usize, t: u32) -> f64 {
    if n < 2 || t == 0 {
        return 0.0;
    }
    let dim = binomial((d + t as usize - 1) as u64, t as u64);
    let nf = n as f64;
    let base = ((nf / dim - 1.0) / (nf - 1.0)).max(0.0);
    base.powf(1.0 / (2.0 * t as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub bound: BoundKind,
    pub applicable: bool,
    pub reason: &'static str,
}

/// All lower bounds applicable at `(d, n, field)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub d: usize,
    pub n: usize,
    pub field: Field,
    pub bukh_cox: Option<f64>,
    pub welch: Option<f64>,
    pub orthoplex: Option<f64>,
    pub levenstein: Option<f64>,
    /// The Levenstein formula at `n = Z(d, F)`, outside its range of validity.
    /// Reported for comparison only; never counted in `best`.
    pub levenstein_boundary: Option<f64>,
    pub best: f64,
    /// `None` when `n <= d`, where orthonormal vectors give coherence zero.
    pub best_name: Option<BoundKind>,
    pub applicability: Vec<Applicability>,
}

impl BoundReport {
    pub fn value(&self, kind: BoundKind) -> Option<f64> {
        match kind {
            BoundKind::BukhCox => self.bukh_cox,
            BoundKind::Welch => self.welch,
            BoundKind::Orthoplex => self.orthoplex,
            BoundKind::Levenstein => self.levenstein,
        }
    }
}

pub fn best_lower_bound(d: usize, n: usize, field: Field) -> BoundReport {
    let z = gerzon(d, field);
    let above_d = n > d;
    let above_z = n > z;
    let mut report = BoundReport {
        d,
        n,
        field,
        bukh_cox: bukh_cox(d, n, field).ok(),
        welch: welch(d, n).ok(),
        orthoplex: above_z.then(|| orthoplex(d)),
        levenstein: if above_z {
            levenstein(d, n, field).ok()
        } else {
            None
        },
        levenstein_boundary: (n == z && above_d).then(|| levenstein_unchecked(d, n, field)),
        best: 0.0,
        best_name: None,
        applicability: vec![
            Applicability {
                bound: BoundKind::BukhCox,
                applicable: above_d,
                reason: "n > d",
            },
            Applicability {
                bound: BoundKind::Welch,
                applicable: above_d,
                reason: "n > d",
            },
            Applicability {
                bound: BoundKind::Orthoplex,
                applicable: above_z,
                reason: "n > Z(d, F)",
            },
            Applicability {
                bound: BoundKind::Levenstein,
                applicable: above_z,
                reason: "n > Z(d, F)",
            },
        ],
    };
    let present: Vec<(BoundKind, f64)> = BoundKind::ALL
        .iter()
        .filter_map(|&k| report.value(k).map(|v| (k, v)))
        .collect();
    if let Some(best) = present.iter().map(|p| p.1).reduce(f64::max) {
        report.best = best;
        report.best_name = present
            .iter()
            .filter(|(_, v)| *v >= best - TIE_TOL)
            .min_by_key(|(k, _)| k.tie_rank())
            .map(|(k, _)| *k);
    }
    report
}

/// Where the leading bound changes as `n` grows, for fixed `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossovers {
    /// `n = d + 1`, where Bukh–Cox and Welch both equal `1/d`.
    pub coincide_at: f64,
    /// Roots of `bukh_cox(n) = welch(n)` for real `n` in `(d + 1, n_max]`.
    pub bukh_cox_welch: Vec<f64>,
    /// First integer `n` at which Levenstein strictly exceeds orthoplex.
    pub levenstein_exceeds_orthoplex: Option<usize>,
}

const BISECTION_TOL: f64 = 1e-6;
const SCAN_STEP: f64 = 1.0 / 64.0;

/// Treats `n` as continuous and locates sign changes of Bukh–Cox minus Welch
/// by a grid scan followed by bisection.
pub fn dominance_crossovers(d: usize, field: Field, n_max: usize) -> Crossovers {
    let df = d as f64;
    let diff = |n: f64| bukh_cox_continuous(df, n, field) - welch_continuous(df, n);
    let lo = df + 1.0;
    let hi = n_max as f64;

    let mut roots = Vec::new();
    let mut a = lo + SCAN_STEP;
    let mut fa = diff(a);
    while a < hi {
        let b = (a + SCAN_STEP).min(hi);
        let fb = diff(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            while r - l > BISECTION_TOL {
                let mid = 0.5 * (l + r);
                let fm = diff(mid);
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }

    let orth = orthoplex(d);
    let levenstein_exceeds_orthoplex = (gerzon(d, field) + 1..=n_max)
        .find(|&n| levenstein_unchecked(d, n, field) > orth + TIE_TOL);

    Crossovers {
        coincide_at: lo,
        bukh_cox_welch: roots,
        levenstein_exceeds_orthoplex,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaturationClass {
    Etf,
    OrthoplexSaturating,
    LevensteinTightTwoDistance,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: SaturationClass,
    /// A violated necessary condition for the reported class.
    pub diagnostic: Option<String>,
}

/// Decides which equality case of the lower bounds a certified frame meets.
/// Orthoplex is checked before Levenstein, since maximal sets of mutually
/// unbiased bases meet both.
pub fn classify_saturation(cert: &Certificate, tol: f64) -> Classification {
    let (d, n, field) = (cert.d, cert.n, cert.field);
    let z = gerzon(d, field);
    let mu = cert.coherence;

    if let Ok(w) = welch(d, n) {
        if (mu - w).abs() <= tol && cert.is_equiangular && cert.is_tight {
            // Gerzon constraints on both the frame and its Naimark complement;
            // the complement of a simplex lives in dimension one and is exempt.
            let limit = if n - d >= 2 {
                z.min(gerzon(n - d, field))
            } else {
                z
            };
            let diagnostic = (n > limit).then(|| {
                format!("equiangular tight frame with n = {n} exceeds min(Z(d), Z(n-d)) = {limit}")
            });
            return Classification {
                class: SaturationClass::Etf,
                diagnostic,
            };
        }
    }
    if n > z {
        if (mu - orthoplex(d)).abs() <= tol {
            let limit = 2 * (z - 1);
            let diagnostic = (n > limit)
                .then(|| format!("orthoplex equality with n = {n} exceeds 2 (Z(d) - 1) = {limit}"));
            return Classification {
                class: SaturationClass::OrthoplexSaturating,
                diagnostic,
            };
        }
        let lev = levenstein_unchecked(d, n, field);
        if (mu - lev).abs() <= tol
            && cert.is_tight
            && cert.angle_profile.subset_of(&[0.0, mu * mu], tol)
        {
            return Classification {
                class: SaturationClass::LevensteinTightTwoDistance,
                diagnostic: None,
            };
        }
    }
    Classification {
        class: SaturationClass::None,
        diagnostic: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gerzon_values() {
        assert_eq!(gerzon(3, Field::Complex), 9);
        assert_eq!(gerzon(3, Field::Real), 6);
        assert_eq!(gerzon(5, Field::Complex), 25);
    }

    #[test]
    fn bukh_cox_against_quoted_value() {
        let v = bukh_cox(5, 7, Field::Complex).unwrap();
        assert!((v - 0.2645).abs() < 1e-4, "{v}");
    }

    #[test]
    fn bukh_cox_real_exact() {
        // m = 1/2, Z(2, R) = 3: 3 / (5 (1 + 1/2 * sqrt(4)) - 3) = 3/7
        let v = bukh_cox(3, 5, Field::Real).unwrap();
        assert!((v - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn welch_values() {
        assert!((welch(3, 9).unwrap() - 0.5).abs() < 1e-15);
        assert!((welch(2, 4).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(welch(3, 3).is_err());
    }

    #[test]
    fn orthoplex_values() {
        assert!((orthoplex(4) - 0.5).abs() < 1e-16);
        assert!((orthoplex(5) - 0.4472135955).abs() < 1e-10);
        assert!((orthoplex(2) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn levenstein_values() {
        let l25 = levenstein(5, 25, Field::Complex).unwrap();
        assert!((l25 - welch(5, 25).unwrap()).abs() < 1e-12);
        assert!((l25 - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        let l31 = levenstein(5, 31, Field::Complex).unwrap();
        assert!((l31 - (32.0f64 / 156.0).sqrt()).abs() < 1e-15);
        assert!(l31 > orthoplex(5));
        assert!(levenstein(5, 26, Field::Complex).unwrap() < orthoplex(5));
        assert!(levenstein(5, 24, Field::Complex).is_err());
    }

    #[test]
    fn generalized_welch_reduces_and_clamps() {
        assert!((generalized_welch(3, 9, 1) - 0.5).abs() < 1e-15);
        assert_eq!(generalized_welch(3, 6, 2), 0.0);
        let gw = generalized_welch(3, 50, 2);
        assert!(gw > 0.0 && gw <= best_lower_bound(3, 50, Field::Complex).best);
    }

    #[test]
    fn best_bound_regimes_in_c5() {
        let r = best_lower_bound(5, 7, Field::Complex);
        assert_eq!(r.best_name, Some(BoundKind::BukhCox));
        assert!((r.best - 0.26447).abs() < 1e-5);
        assert_eq!(
            best_lower_bound(5, 8, Field::Complex).best_name,
            Some(BoundKind::Welch)
        );
        let r = best_lower_bound(5, 28, Field::Complex);
        assert_eq!(r.best_name, Some(BoundKind::Orthoplex));
        assert_eq!(r.best, orthoplex(5));
        let r = best_lower_bound(5, 25, Field::Complex);
        assert_eq!(r.levenstein, None);
        assert!(r.levenstein_boundary.is_some());
    }

    #[test]
    fn no_bound_below_dimension() {
        let r = best_lower_bound(4, 4, Field::Real);
        assert_eq!(r.best, 0.0);
        assert_eq!(r.best_name, None);
        assert!(r.applicability.iter().all(|a| !a.applicable));
    }

    #[test]
    fn simplex_point_ties_resolve_to_welch() {
        for field in [Field::Real, Field::Complex] {
            for d in 2..10 {
                let r = best_lower_bound(d, d + 1, field);
                assert!((r.best - 1.0 / d as f64).abs() < 1e-14);
                assert_eq!(r.best_name, Some(BoundKind::Welch));
            }
        }
    }

    #[test]
    fn crossovers_in_c5() {
        let c = dominance_crossovers(5, Field::Complex, 49);
        assert_eq!(c.coincide_at, 6.0);
        assert_eq!(c.bukh_cox_welch.len(), 1);
        assert!((c.bukh_cox_welch[0] - 7.7912878474779).abs() < 1e-5);
        assert_eq!(c.levenstein_exceeds_orthoplex, Some(31));
    }
}
