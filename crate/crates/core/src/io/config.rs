use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{HartreeParams, Sign};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Evolve,
    Groundstate,
    AlphaSweep,
    Meanfield,
    Dichotomy,
    Verify,
}

impl Command {
    pub fn is_many_body(self) -> bool {
        self == Command::Meanfield
    }
}

/// A validated run description. Every key is optional except `command`;
/// unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    #[serde(default = "defaults::mu")]
    pub mu: Sign,
    #[serde(default = "defaults::lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Spatial dimension; defaults to 3, or 1 for many-body runs.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default = "defaults::points")]
    pub points: usize,
    #[serde(default = "defaults::half_width")]
    pub half_width: f64,
    #[serde(default = "defaults::horizon")]
    pub horizon: f64,
    #[serde(default = "defaults::one")]
    pub initial_width: f64,
    /// Initial datum read from a checkpoint instead of the Gaussian.
    #[serde(default)]
    pub initial_state: Option<PathBuf>,
    #[serde(default)]
    pub perturbation: f64,
    /// Sweep values; command-specific defaults when absent.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default = "defaults::sample_every")]
    pub sample_every: usize,
    /// Store a field every this many steps in `evolve`.
    #[serde(default = "defaults::sample_every")]
    pub store_every: usize,
    /// `H^s` indices recorded along `evolve`.
    #[serde(default)]
    pub sobolev: Vec<f64>,
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default = "defaults::one")]
    pub interpolation_s: f64,
    /// When set, `meanfield` runs the coupled schedule `α_N = α N^{-κ}`.
    #[serde(default)]
    pub schedule_exponent: Option<f64>,
    #[serde(default = "defaults::blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default = "defaults::squeeze")]
    pub squeeze: f64,
    #[serde(default = "defaults::one")]
    pub omega: f64,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    /// Write final states as checkpoints.
    #[serde(default = "defaults::yes")]
    pub checkpoints: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    use crate::params::Sign;

    pub fn gamma() -> f64 {
        1.0
    }
    pub fn sigma() -> f64 {
        0.5
    }
    pub fn mu() -> Sign {
        Sign::Defocusing
    }
    pub fn lambda() -> f64 {
        1.0
    }
    pub fn dt() -> f64 {
        2e-3
    }
    pub fn points() -> usize {
        64
    }
    pub fn half_width() -> f64 {
        12.0
    }
    pub fn horizon() -> f64 {
        1.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn sample_every() -> usize {
        10
    }
    pub fn blowup_factor() -> f64 {
        5.0
    }
    pub fn squeeze() -> f64 {
        0.9
    }
    pub fn tol() -> f64 {
        1e-10
    }
    pub fn max_iter() -> usize {
        2000
    }
    pub fn yes() -> bool {
        true
    }
}

/// Parses and validates a JSON run description.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

fn range_error(key: &str, value: impl std::fmt::Display, range: &str) -> Error {
    Error::config(format!("{key} = {value} outside the admissible range {range}"))
}

impl RunConfig {
    /// Resolves command-dependent defaults so every output records the
    /// values actually used.
    pub fn fill_defaults(&mut self) {
        if self.dim.is_none() {
            self.dim = Some(if self.command.is_many_body() { 1 } else { 3 });
        }
        if self.values.is_none() {
            self.values = match self.command {
                Command::AlphaSweep => Some(vec![0.05, 0.1, 0.2, 0.4]),
                Command::Meanfield => Some(vec![2.0, 3.0, 4.0]),
                Command::Dichotomy => Some(vec![0.5, 0.9, 1.1, 1.5]),
                _ => None,
            };
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(if self.command.is_many_body() { 1 } else { 3 })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim(), self.points, self.half_width)
            .map_err(|e| Error::config(format!("grid (dim, points, half_width): {e}")))
    }

    pub fn params(&self) -> HartreeParams {
        HartreeParams::new(self.gamma, self.sigma, self.mu, self.lambda)
            .with_alpha(self.alpha)
            .with_dt(self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.5) {
            return Err(range_error("gamma", self.gamma, "(0, 3/2)"));
        }
        if !(self.sigma >= 0.5 * self.gamma - 1e-12 && self.sigma <= 1.0) {
            return Err(range_error(
                "sigma",
                self.sigma,
                &format!("[gamma/2, 1] = [{}, 1]", 0.5 * self.gamma),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(range_error("lambda", self.lambda, "(0, inf)"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(range_error("alpha", self.alpha, "[0, inf)"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(range_error("dt", self.dt, "(0, inf)"));
        }
        if !(1..=3).contains(&self.dim()) {
            return Err(range_error("dim", self.dim(), "{1, 2, 3}"));
        }
        if self.points < 8 || !self.points.is_multiple_of(2) {
            return Err(range_error("points", self.points, "even integers >= 8"));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(range_error("half_width", self.half_width, "(0, inf)"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(range_error("horizon", self.horizon, "[0, inf)"));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(Error::config(format!(
                "horizon = {} must be a multiple of dt = {}",
                self.horizon, self.dt
            )));
        }
        if !(self.initial_width > 0.0) {
            return Err(range_error("initial_width", self.initial_width, "(0, inf)"));
        }
        if !(self.perturbation >= 0.0) {
            return Err(range_error("perturbation", self.perturbation, "[0, inf)"));
        }
        if self.sample_every == 0 {
            return Err(range_error("sample_every", 0, "integers >= 1"));
        }
        if self.store_every == 0 {
            return Err(range_error("store_every", 0, "integers >= 1"));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(range_error("thetas", t, "[0, 1)"));
        }
        if !(self.interpolation_s >= 0.0) {
            return Err(range_error("interpolation_s", self.interpolation_s, "[0, inf)"));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(range_error("blowup_factor", self.blowup_factor, "(1, inf)"));
        }
        if !(self.squeeze > 0.0) {
            return Err(range_error("squeeze", self.squeeze, "(0, inf)"));
        }
        if !(self.omega > 0.0) {
            return Err(range_error("omega", self.omega, "(0, inf)"));
        }
        if !(self.tol > 0.0) {
            return Err(range_error("tol", self.tol, "(0, inf)"));
        }
        if self.threads == Some(0) {
            return Err(range_error("threads", 0, "integers >= 1"));
        }
        if let Some(values) = &self.values {
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config("values must be strictly increasing"));
            }
        }
        match self.command {
            Command::Meanfield => {
                if !(self.alpha > 0.0) {
                    return Err(range_error("alpha", self.alpha, "(0, inf) for many-body runs"));
                }
                if let Some(k) = self.schedule_exponent {
                    if !(k >= 0.0) {
                        return Err(range_error("schedule_exponent", k, "[0, inf)"));
                    }
                }
            }
            Command::Dichotomy => {
                if (self.sigma - 0.5 * self.gamma).abs() > 1e-12 {
                    return Err(Error::config(format!(
                        "sigma = {} must equal gamma/2 = {} for the dichotomy",
                        self.sigma,
                        0.5 * self.gamma
                    )));
                }
            }
            Command::Evolve
                if self.mu == Sign::Focusing
                    && self.alpha == 0.0
                    && (self.sigma - 0.5 * self.gamma).abs() < 1e-12 =>
            {
                log::warn!(
                    "focusing mass-critical run without regularization; \
                     solutions above the critical mass may blow up"
                );
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_evolve_fills_defaults() {
        let c = parse_config(r#"{"command":"evolve","gamma":1,"sigma":0.5,"mu":1,"lambda":1}"#).unwrap();
        assert_eq!(c.points, 64);
        assert_eq!(c.half_width, 12.0);
        assert_eq!(c.dt, 2e-3);
        assert_eq!(c.dim, Some(3));
    }

    #[test]
    fn meanfield_defaults_to_one_dimension() {
        let c = parse_config(r#"{"command":"meanfield","alpha":0.5,"sigma":1}"#).unwrap();
        assert_eq!(c.dim(), 1);
    }

    #[test]
    fn rejects_domain_violations_by_key() {
        let e = parse_config(r#"{"command":"evolve","gamma":1,"sigma":0.3}"#).unwrap_err();
        assert!(e.to_string().contains("sigma"));
        let e = parse_config(r#"{"command":"evolve","gamma":1.6,"sigma":0.9}"#).unwrap_err();
        assert!(e.to_string().contains("gamma"));
        assert!(parse_config(r#"{"command":"evolve","mu":0}"#).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = parse_config(r#"{"command":"evolve","gama":1}"#).unwrap_err();
        assert!(e.to_string().contains("gama"));
    }
}
