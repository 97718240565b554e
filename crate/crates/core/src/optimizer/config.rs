use serde::Serialize;

use crate::error::{Error, ParseKind, Result};
use crate::frame::Field;

/// Search parameters. Defaults: 32 restarts, `beta` from 50 doubling over 12
/// rounds (ending near `1e5`), 2000 descent iterations per round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub d: usize,
    pub n: usize,
    pub field: Field,
    pub restarts: usize,
    pub seed: u64,
    pub beta_init: f64,
    pub beta_growth: f64,
    pub beta_rounds: usize,
    pub max_iters_per_round: usize,
    pub step_init: f64,
    pub grad_tol: f64,
    pub ap_enabled: bool,
    pub ap_shrink: f64,
    /// Restrict the search to unit-norm tight frames.
    pub require_tight: bool,
    pub phase_quantize_q: Option<u32>,
    /// Run the non-spanning escape move at the end of every restart.
    pub perturb_escape: bool,
}

impl SolverConfig {
    pub fn new(d: usize, n: usize, field: Field) -> Self {
        SolverConfig {
            d,
            n,
            field,
            restarts: 32,
            seed: 0,
            beta_init: 50.0,
            beta_growth: 2.0,
            beta_rounds: 12,
            max_iters_per_round: 2000,
            step_init: 0.1,
            grad_tol: 1e-12,
            ap_enabled: true,
            ap_shrink: 0.995,
            require_tight: false,
            phase_quantize_q: None,
            perturb_escape: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.d == 0 || self.n < 2 {
            return fail("need d >= 1 and n >= 2");
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1");
        }
        if !(self.beta_growth > 1.0) {
            return fail("beta_growth must exceed 1");
        }
        if !(self.beta_init > 0.0) || !self.beta_init.is_finite() {
            return fail("beta_init must be positive");
        }
        if !(self.ap_shrink > 0.0 && self.ap_shrink < 1.0) {
            return fail("ap_shrink must lie in (0, 1)");
        }
        if !(self.step_init > 0.0) {
            return fail("step_init must be positive");
        }
        if !(self.grad_tol >= 0.0) {
            return fail("grad_tol must be nonnegative");
        }
        if self.phase_quantize_q == Some(0) {
            return fail("phase_quantize_q must be positive");
        }
        Ok(())
    }

    /// Applies one `key = value` setting; keys are the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{value}` for `{key}`")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::InvalidArgument(format!(
                    "bad boolean `{value}` for `{key}`"
                ))),
            }
        }
        match key {
            "d" => self.d = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "field" => self.field = value.parse()?,
            "restarts" => self.restarts = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "beta_init" => self.beta_init = num(key, value)?,
            "beta_growth" => self.beta_growth = num(key, value)?,
            "beta_rounds" => self.beta_rounds = num(key, value)?,
            "max_iters_per_round" => self.max_iters_per_round = num(key, value)?,
            "step_init" => self.step_init = num(key, value)?,
            "grad_tol" => self.grad_tol = num(key, value)?,
            "ap_enabled" => self.ap_enabled = flag(key, value)?,
            "ap_shrink" => self.ap_shrink = num(key, value)?,
            "require_tight" => self.require_tight = flag(key, value)?,
            "phase_quantize_q" => {
                self.phase_quantize_q = match value {
                    "" | "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "perturb_escape" => self.perturb_escape = flag(key, value)?,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file over `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, ParseKind::Config, "expected `key = value`"))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(i + 1, ParseKind::Config, e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        cfg.apply_text(
            "# search\nd = 5\nn = 7\nfield = C\nrestarts = 4\nseed = 99\nap_enabled = false\nphase_quantize_q = 3\n",
        )
        .unwrap();
        assert_eq!((cfg.d, cfg.n, cfg.field), (5, 7, Field::Complex));
        assert_eq!(cfg.restarts, 4);
        assert_eq!(cfg.seed, 99);
        assert!(!cfg.ap_enabled);
        assert_eq!(cfg.phase_quantize_q, Some(3));
        cfg.validate().unwrap();
    }

    #[test]
    fn reports_line_of_bad_key() {
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        let err = cfg.apply_text("d = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn validation() {
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        cfg.beta_growth = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        cfg.ap_shrink = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::new(2, 3, Field::Real);
        cfg.restarts = 0;
        assert!(cfg.validate().is_err());
    }
}
