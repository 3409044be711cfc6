use serde::{Deserialize, Serialize};

use super::{Convolver, Field, Spectral};
use crate::error::{Error, Result};
use crate::params::HartreeParams;

/// `T = ½‖(-Δ)^{σ/2} f‖²`, `V = (μλ/4)⟨f, (K∗|f|²) f⟩`, `E = T + V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// Cached spectral plan and convolver for repeated energy evaluation.
#[derive(Clone, Debug)]
pub struct EnergyEvaluator {
    spectral: Spectral,
    conv: Convolver,
    params: HartreeParams,
}

impl EnergyEvaluator {
    pub fn new(grid: &super::Grid, params: &HartreeParams) -> Result<Self> {
        let conv = Convolver::from_spec(grid, &params.kernel_spec())?;
        Ok(Self {
            spectral: Spectral::new(grid),
            conv,
            params: *params,
        })
    }

    pub fn from_parts(spectral: Spectral, conv: Convolver, params: HartreeParams) -> Self {
        Self {
            spectral,
            conv,
            params,
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    pub fn params(&self) -> &HartreeParams {
        &self.params
    }

    pub fn kinetic(&self, f: &Field) -> f64 {
        let sigma = self.params.sigma;
        0.5 * self
            .spectral
            .weighted_mass(f, |k| if k == 0.0 { 0.0 } else { k.powf(sigma) })
    }

    /// `K ∗ |f|²` without the coupling.
    pub fn self_potential(&self, f: &Field) -> Vec<f64> {
        self.conv.convolve(&f.density())
    }

    /// `⟨f, (K∗|f|²) f⟩` without the coupling.
    pub fn interaction(&self, f: &Field) -> f64 {
        let rho = f.density();
        let pot = self.conv.convolve(&rho);
        rho.iter().zip(&pot).map(|(r, p)| r * p).sum::<f64>() * f.grid().cell_volume()
    }

    pub fn energies(&self, f: &Field) -> Energies {
        let kinetic = self.kinetic(f);
        let potential = 0.25 * self.params.coupling() * self.interaction(f);
        Energies {
            kinetic,
            potential,
            total: kinetic + potential,
        }
    }

    /// `|V| / (T^{γ/(2σ)} ‖f‖₂^{4-γ/σ})`, invariant under mass-preserving
    /// dilations and amplitude scaling.
    pub fn gns_ratio(&self, f: &Field) -> Result<f64> {
        let e = self.energies(f);
        if !(e.kinetic > 0.0) {
            return Err(Error::UndefinedRatio(
                "kinetic energy vanishes; the ratio is undefined".into(),
            ));
        }
        let (g, s) = (self.params.gamma, self.params.sigma);
        let norm = f.l2_norm();
        Ok(e.potential.abs() / (e.kinetic.powf(g / (2.0 * s)) * norm.powf(4.0 - g / s)))
    }
}

pub fn energy_functionals(f: &Field, params: &HartreeParams) -> Result<Energies> {
    if !(f.mass() > 0.0) {
        return Err(Error::invalid("energy of the zero field requested"));
    }
    Ok(EnergyEvaluator::new(f.grid(), params)?.energies(f))
}

pub fn gns_ratio(f: &Field, params: &HartreeParams) -> Result<f64> {
    EnergyEvaluator::new(f.grid(), params)?.gns_ratio(f)
}
