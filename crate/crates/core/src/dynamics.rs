//! Strang-split propagation of the (regularized) Hartree equation.
//!
//! A step is `e^{-iS dt/2} e^{-i dt J(φ)} e^{-iS dt/2}` with `S = |k|^{2σ}`
//! diagonal in Fourier space and `J = μλ K∗|φ|²` diagonal in position space.
//! The potential substep is exact: multiplying by a pointwise phase leaves
//! `|φ|` and hence `J` unchanged. Every substep is unitary, so the discrete
//! mass is conserved to rounding.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::HartreeParams;
use crate::spectral::{Convolver, Energies, EnergyEvaluator, Field, Grid, Spectral};

/// Propagator for one grid and parameter set.
#[derive(Clone, Debug)]
pub struct HartreeSolver {
    energy: EnergyEvaluator,
    half_phase: Vec<C64>,
    potential_offset: f64,
}

impl HartreeSolver {
    pub fn new(grid: &Grid, params: &HartreeParams) -> Result<Self> {
        params.validate()?;
        let conv = Convolver::from_spec(grid, &params.kernel_spec())?;
        Ok(Self::with_convolver(grid, params, conv))
    }

    /// Uses a prebuilt convolver, which must match `params`' kernel.
    pub fn with_convolver(grid: &Grid, params: &HartreeParams, conv: Convolver) -> Self {
        let spectral = Spectral::new(grid);
        let half_phase = kinetic_phase(&spectral, params.sigma, 0.5 * params.dt);
        Self {
            energy: EnergyEvaluator::from_parts(spectral, conv, *params),
            half_phase,
            potential_offset: 0.0,
        }
    }

    /// Adds a constant to the potential (a pure gauge change).
    pub fn with_potential_offset(mut self, c: f64) -> Self {
        self.potential_offset = c;
        self
    }

    pub fn params(&self) -> &HartreeParams {
        self.energy.params()
    }

    pub fn grid(&self) -> &Grid {
        self.energy.spectral().grid()
    }

    pub fn spectral(&self) -> &Spectral {
        self.energy.spectral()
    }

    pub fn energy(&self) -> &EnergyEvaluator {
        &self.energy
    }

    /// Suggested step when `dt · max|k|^{2σ}` exceeds `20π`, else `None`.
    pub fn accuracy_guard(&self) -> Option<f64> {
        let kmax = self.spectral().k_abs().iter().cloned().fold(0.0, f64::max);
        let fastest = kmax.powf(2.0 * self.params().sigma);
        let limit = 20.0 * std::f64::consts::PI;
        if self.params().dt * fastest > limit {
            Some(limit / fastest)
        } else {
            None
        }
    }

    /// `μλ K∗|φ|²` plus the gauge offset.
    pub fn potential(&self, phi: &Field) -> Vec<f64> {
        let c = self.params().coupling();
        let mut v = self.energy.self_potential(phi);
        for x in &mut v {
            *x = c * *x + self.potential_offset;
        }
        v
    }

    pub fn energies(&self, phi: &Field) -> Energies {
        self.energy.energies(phi)
    }

    /// One Strang step with the configured `dt`.
    pub fn step(&self, phi: &mut Field) {
        self.step_with_phase(phi, &self.half_phase, self.params().dt);
    }

    /// One Strang step with an arbitrary (possibly negative) `dt`.
    pub fn step_by(&self, phi: &mut Field, dt: f64) {
        if dt == self.params().dt {
            self.step(phi);
        } else {
            let half = kinetic_phase(self.spectral(), self.params().sigma, 0.5 * dt);
            self.step_with_phase(phi, &half, dt);
        }
    }

    fn step_with_phase(&self, phi: &mut Field, half: &[C64], dt: f64) {
        let dim = self.grid().dim();
        let fft = self.spectral().fft();
        let kick = |values: &mut [C64]| {
            fft.forward(values, dim);
            for (v, p) in values.iter_mut().zip(half) {
                *v *= p;
            }
            fft.inverse_normalized(values, dim);
        };
        kick(phi.values_mut());
        let pot = self.potential(phi);
        for (v, &u) in phi.values_mut().iter_mut().zip(&pot) {
            *v *= C64::from_polar(1.0, -dt * u);
        }
        kick(phi.values_mut());
    }

    pub fn diagnostics(&self, phi: &Field, t: f64, sobolev: &[f64]) -> Diagnostics {
        let rho = phi.density();
        let pot = self.energy.convolver().convolve(&rho);
        let h = self.grid().cell_volume();
        let interaction: f64 = rho.iter().zip(&pot).map(|(r, p)| r * p).sum::<f64>() * h;
        let kinetic = self.energy.kinetic(phi);
        let potential = 0.25 * self.params().coupling() * interaction;
        Diagnostics {
            t,
            mass: rho.iter().sum::<f64>() * h,
            kinetic,
            potential,
            energy: kinetic + potential,
            sobolev: sobolev
                .iter()
                .map(|&s| self.spectral().hs_norm(phi, s))
                .collect(),
            sup_potential: pot.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }
}

fn kinetic_phase(spectral: &Spectral, sigma: f64, dt: f64) -> Vec<C64> {
    spectral
        .k_abs()
        .iter()
        .map(|&k| {
            let w = if k == 0.0 { 0.0 } else { k.powf(2.0 * sigma) };
            C64::from_polar(1.0, -w * dt)
        })
        .collect()
}

/// Per-sample record along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    /// `‖φ_t‖_{H^s}` for each requested `s`.
    pub sobolev: Vec<f64>,
    /// `‖K∗|φ_t|²‖_∞` (no coupling factor).
    pub sup_potential: f64,
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Store a field every `store_stride` steps (the initial and final fields
    /// are always stored).
    pub store_stride: usize,
    /// Record diagnostics every `diag_stride` steps.
    pub diag_stride: usize,
    /// `H^s` indices recorded in the diagnostics.
    pub sobolev: Vec<f64>,
    /// Stop once `T(t) > factor · T(0)`.
    pub blowup_factor: Option<f64>,
    /// Require `‖φ₀‖₂ = 1 ± 1e-8`.
    pub require_normalized: bool,
    pub potential_offset: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            store_stride: 10,
            diag_stride: 1,
            sobolev: Vec::new(),
            blowup_factor: None,
            require_normalized: true,
            potential_offset: 0.0,
        }
    }
}

impl EvolveOptions {
    pub fn store_every(mut self, stride: usize) -> Self {
        self.store_stride = stride.max(1);
        self
    }

    pub fn diag_every(mut self, stride: usize) -> Self {
        self.diag_stride = stride.max(1);
        self
    }

    pub fn with_sobolev(mut self, s: &[f64]) -> Self {
        self.sobolev = s.to_vec();
        self
    }

    pub fn with_blowup_factor(mut self, factor: f64) -> Self {
        self.blowup_factor = Some(factor);
        self
    }

    pub fn unnormalized(mut self) -> Self {
        self.require_normalized = false;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: HartreeParams,
    pub grid: Grid,
    pub diagnostics: Vec<Diagnostics>,
    pub stored: Vec<(f64, Field)>,
    /// First diagnostic time at which the blow-up threshold was crossed.
    pub blowup_time: Option<f64>,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn final_state(&self) -> &Field {
        &self.stored.last().expect("trajectory stores its final field").1
    }

    pub fn initial_state(&self) -> &Field {
        &self.stored[0].1
    }
}

/// Number of steps of size `dt` covering `horizon`.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon = {horizon} must be >= 0")));
    }
    let n = (horizon / dt).round();
    if ((n * dt) - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::invalid(format!(
            "horizon {horizon} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

/// Evolves `phi0` over `[0, horizon]`.
pub fn evolve(
    phi0: &Field,
    params: &HartreeParams,
    horizon: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let solver =
        HartreeSolver::new(phi0.grid(), params)?.with_potential_offset(opts.potential_offset);
    evolve_with(&solver, phi0, horizon, opts)
}

pub fn evolve_with(
    solver: &HartreeSolver,
    phi0: &Field,
    horizon: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    phi0.ensure_finite()?;
    if opts.require_normalized && (phi0.l2_norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!(
            "initial datum has ‖φ₀‖₂ = {}, expected 1 (disable the check to evolve unnormalized data)",
            phi0.l2_norm()
        )));
    }
    if let Some(dt) = solver.accuracy_guard() {
        log::warn!(
            "dt = {} under-resolves the fastest kinetic phase; suggested dt <= {dt:.3e}",
            solver.params().dt
        );
    }
    let params = *solver.params();
    let steps = step_count(horizon, params.dt)?;
    let store_stride = opts.store_stride.max(1);
    let diag_stride = opts.diag_stride.max(1);

    let mut phi = phi0.clone();
    let first = solver.diagnostics(&phi, 0.0, &opts.sobolev);
    let threshold = opts.blowup_factor.map(|f| f * first.kinetic);
    let mut diagnostics = vec![first];
    let mut stored = vec![(0.0, phi.clone())];
    let mut blowup_time = None;
    let mut taken = 0;

    for n in 1..=steps {
        solver.step(&mut phi);
        taken = n;
        let t = n as f64 * params.dt;
        if !phi.is_finite() {
            let (_, last) = stored.pop().expect("initial field stored");
            return Err(Error::PropagationFailure {
                step: n,
                time: t,
                reason: "non-finite amplitude".into(),
                last_good: Box::new(last),
            });
        }
        let last_step = n == steps;
        if n % diag_stride == 0 || last_step || threshold.is_some() {
            let d = solver.diagnostics(&phi, t, &opts.sobolev);
            let crossed = threshold.is_some_and(|th| d.kinetic > th);
            if n % diag_stride == 0 || last_step || crossed {
                diagnostics.push(d);
            }
            if crossed {
                blowup_time = Some(t);
                stored.push((t, phi.clone()));
                break;
            }
        }
        if n % store_stride == 0 || last_step {
            stored.push((t, phi.clone()));
        }
    }

    Ok(Trajectory {
        params,
        grid: phi0.grid().clone(),
        diagnostics,
        stored,
        blowup_time,
        steps: taken,
    })
}

/// `μλ K∗|φ|²` as a real-valued field.
pub fn hartree_potential(phi: &Field, params: &HartreeParams) -> Result<Field> {
    let solver = HartreeSolver::new(phi.grid(), params)?;
    let v = solver.potential(phi);
    Field::new(
        phi.grid().clone(),
        v.into_iter().map(|x| C64::new(x, 0.0)).collect(),
    )
}

pub fn strang_step(phi: &Field, params: &HartreeParams) -> Result<Field> {
    let solver = HartreeSolver::new(phi.grid(), params)?;
    if let Some(dt) = solver.accuracy_guard() {
        log::warn!("dt = {} exceeds the accuracy guard; suggested dt <= {dt:.3e}", params.dt);
    }
    let mut out = phi.clone();
    solver.step(&mut out);
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PersistenceReport {
    /// `sup_t ‖φ_t‖_{H^{γ/2}}`.
    pub nu: f64,
    pub times: Vec<f64>,
    /// `‖φ_t‖_{H^s} / ‖φ₀‖_{H^s}`.
    pub ratios: Vec<f64>,
    /// Smallest `c ≥ 0` with `ratio(t) ≤ exp(c ν² t)` at every sample.
    pub fitted_c: f64,
}

impl PersistenceReport {
    /// Whether `ratio(t) ≤ (t + 1)(1 + slack)` at every sample.
    pub fn within_linear_envelope(&self, slack: f64) -> bool {
        self.times
            .iter()
            .zip(&self.ratios)
            .all(|(&t, &r)| r <= (t + 1.0) * (1.0 + slack))
    }
}

pub fn persistence_report(traj: &Trajectory, s: f64) -> PersistenceReport {
    let spectral = Spectral::new(&traj.grid);
    let half_gamma = 0.5 * traj.params.gamma;
    let base = spectral.hs_norm(traj.initial_state(), s);
    let mut nu: f64 = 0.0;
    let mut times = Vec::with_capacity(traj.stored.len());
    let mut ratios = Vec::with_capacity(traj.stored.len());
    for (t, f) in &traj.stored {
        nu = nu.max(spectral.hs_norm(f, half_gamma));
        times.push(*t);
        ratios.push(spectral.hs_norm(f, s) / base);
    }
    let fitted_c = times
        .iter()
        .zip(&ratios)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &r)| r.ln() / (nu * nu * t))
        .fold(0.0, f64::max);
    PersistenceReport {
        nu,
        times,
        ratios,
        fitted_c,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupReport {
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub factor: f64,
    pub max_ratio: f64,
    pub flagged: bool,
    pub flag_time: Option<f64>,
}

/// Flags the first sample where `T(t) > factor · T(0)`. A threshold event,
/// not a singularity time.
pub fn blowup_monitor(traj: &Trajectory, factor: f64) -> BlowupReport {
    let times = traj.times();
    let kinetic: Vec<f64> = traj.diagnostics.iter().map(|d| d.kinetic).collect();
    let t0 = kinetic[0];
    let max_ratio = kinetic.iter().map(|&k| k / t0).fold(0.0, f64::max);
    let flag_time = times
        .iter()
        .zip(&kinetic)
        .find(|(_, &k)| k > factor * t0)
        .map(|(&t, _)| t);
    BlowupReport {
        times,
        kinetic,
        factor,
        max_ratio,
        flagged: flag_time.is_some(),
        flag_time,
    }
}
