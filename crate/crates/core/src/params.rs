use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{KernelMethod, KernelSpec};

/// Sign `μ` of the interaction: `-1` focusing, `+1` defocusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Focusing => -1.0,
            Sign::Defocusing => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Focusing => Sign::Defocusing,
            Sign::Defocusing => Sign::Focusing,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Sign::Focusing),
            1 => Ok(Sign::Defocusing),
            other => Err(format!("mu must be -1 or +1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Focusing => -1,
            Sign::Defocusing => 1,
        }
    }
}

/// Physical and numerical parameters of the (regularized) Hartree flow
/// `i∂_t φ = (-Δ)^σ φ + μλ (K ∗ |φ|^2) φ`, `K = 1/(|x|^γ + α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HartreeParams {
    pub gamma: f64,
    pub sigma: f64,
    pub mu: Sign,
    pub lambda: f64,
    pub alpha: f64,
    pub dt: f64,
    /// Convolution route; `None` picks the default for `alpha`.
    #[serde(default)]
    pub method: Option<KernelMethod>,
}

impl HartreeParams {
    pub fn new(gamma: f64, sigma: f64, mu: Sign, lambda: f64) -> Self {
        Self {
            gamma,
            sigma,
            mu,
            lambda,
            alpha: 0.0,
            dt: 2e-3,
            method: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_mu(mut self, mu: Sign) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_method(mut self, method: KernelMethod) -> Self {
        self.method = Some(method);
        self
    }

    /// `μλ`.
    pub fn coupling(&self) -> f64 {
        self.mu.value() * self.lambda
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        let spec = KernelSpec::new(self.gamma, self.alpha);
        match self.method {
            Some(m) => spec.with_method(m),
            None => spec,
        }
    }

    /// `σ = γ/2`, the mass-critical case.
    pub fn is_mass_critical(&self) -> bool {
        (self.sigma - 0.5 * self.gamma).abs() < 1e-12
    }

    /// Checks the admissible ranges `γ ∈ (0, 3/2)`, `σ ∈ [γ/2, 1]`, `λ ≥ 0`,
    /// `α ≥ 0`, `dt > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.5) {
            return Err(Error::config(format!(
                "gamma = {} outside the admissible range (0, 3/2)",
                self.gamma
            )));
        }
        if !(self.sigma >= 0.5 * self.gamma - 1e-12 && self.sigma <= 1.0) {
            return Err(Error::config(format!(
                "sigma = {} outside the admissible range [gamma/2, 1] = [{}, 1]",
                self.sigma,
                0.5 * self.gamma
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!("lambda = {} must be >= 0", self.lambda)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt = {} must be > 0", self.dt)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_round_trips_through_json() {
        let p = HartreeParams::new(1.0, 0.5, Sign::Focusing, 2.0);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"mu\":-1"));
        let back: HartreeParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Sign>("0").is_err());
    }

    #[test]
    fn rejects_mass_supercritical_sigma() {
        let p = HartreeParams::new(1.0, 0.3, Sign::Defocusing, 1.0);
        assert!(p.validate().is_err());
        let p = HartreeParams::new(1.6, 1.0, Sign::Defocusing, 1.0);
        assert!(p.validate().is_err());
        assert!(HartreeParams::new(1.0, 0.5, Sign::Defocusing, 1.0).validate().is_ok());
    }
}
