//! Mass-critical ground states `(-Δ)^σ Q + ωQ = (|x|^{-γ} ∗ Q²) Q`.
//!
//! The frequency `ω > 0` fixes the scale of an otherwise dilation-degenerate
//! problem. When `σ = γ/2` the dilation `Q ↦ ℓ^{d/2} Q(ℓ·)` maps the
//! solution at `ω` to the one at `ℓ^{2σ} ω` and preserves `‖Q‖₂`, so the
//! critical coupling `λ_c = ‖Q‖₂²` does not depend on `ω`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{HartreeParams, Sign};
use crate::spectral::{Convolver, EnergyEvaluator, Field, Grid, KernelMethod, RadialKernel, Spectral};

#[derive(Clone, Debug)]
pub struct GroundState {
    pub profile: Field,
    pub gamma: f64,
    pub sigma: f64,
    pub omega: f64,
    /// Sup norm of `(-Δ)^σ Q + ωQ - (K∗Q²)Q`.
    pub residual: f64,
    pub iterations: usize,
    /// Residual after each iteration.
    pub history: Vec<f64>,
}

impl GroundState {
    /// `‖Q‖₂²`.
    pub fn mass(&self) -> f64 {
        self.profile.mass()
    }

    pub fn critical_mass(&self) -> CriticalMass {
        critical_mass(self)
    }

    /// Unit-mass copy of the profile dilated by `squeeze`:
    /// `x ↦ squeeze^{-d/2} Q(x / squeeze) / ‖Q‖₂`.
    pub fn squeezed_unit(&self, squeeze: f64) -> Field {
        let spectral = Spectral::new(self.profile.grid());
        let mut f = spectral.dilate(&self.profile, 1.0 / squeeze);
        f.normalize();
        f
    }

    /// The critical-case solution at another frequency, resampled onto the
    /// same grid.
    pub fn rescaled_to(&self, omega: f64) -> Result<Field> {
        if !is_critical(self.gamma, self.sigma) {
            return Err(Error::invalid(
                "frequency rescaling is only mass-preserving when sigma = gamma/2",
            ));
        }
        let ell = (omega / self.omega).powf(0.5 / self.sigma);
        let d = self.profile.grid().dim() as f64;
        let spectral = Spectral::new(self.profile.grid());
        Ok(spectral.dilate(&self.profile, ell).scaled(ell.powf(0.5 * d)))
    }

    /// `γ, σ, ω, residual, mass`, the checkpoint metadata block.
    pub fn metadata(&self) -> [f64; 5] {
        [self.gamma, self.sigma, self.omega, self.residual, self.mass()]
    }
}

/// `λ_{H,c}`, finite only in the mass-critical case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CriticalMass {
    Finite(f64),
    Infinite,
}

impl CriticalMass {
    pub fn value(self) -> f64 {
        match self {
            CriticalMass::Finite(m) => m,
            CriticalMass::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for CriticalMass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriticalMass::Finite(m) => write!(f, "{m:.16e}"),
            CriticalMass::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for CriticalMass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CriticalMass::Finite(m) => s.serialize_f64(*m),
            CriticalMass::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for CriticalMass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(m) => Ok(CriticalMass::Finite(m)),
            Repr::Str(s) if s == "inf" => Ok(CriticalMass::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad critical mass {s:?}"))),
        }
    }
}

pub fn critical_mass(gs: &GroundState) -> CriticalMass {
    if is_critical(gs.gamma, gs.sigma) {
        CriticalMass::Finite(gs.mass())
    } else {
        CriticalMass::Infinite
    }
}

fn is_critical(gamma: f64, sigma: f64) -> bool {
    (sigma - 0.5 * gamma).abs() < 1e-12
}

#[derive(Clone, Debug)]
pub struct PetviashviliOptions {
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Width of the Gaussian starting guess; `None` uses `L/6`.
    pub initial_width: Option<f64>,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        Self {
            omega: 1.0,
            tol: 1e-10,
            max_iter: 2000,
            initial_width: None,
        }
    }
}

/// Operators shared by both solvers.
struct Problem {
    spectral: Spectral,
    conv: Convolver,
    /// `|k|^{2σ}` per Fourier coefficient.
    symbol: Vec<f64>,
}

impl Problem {
    fn new(gamma: f64, sigma: f64, grid: &Grid) -> Result<Self> {
        if !(gamma > 0.0 && gamma < grid.dim() as f64) {
            return Err(Error::config(format!(
                "ground states need 0 < gamma < dim, got gamma = {gamma} in dim {}",
                grid.dim()
            )));
        }
        if !(sigma >= 0.5 * gamma - 1e-12 && sigma <= 1.0) {
            return Err(Error::config(format!(
                "sigma = {sigma} outside [gamma/2, 1] = [{}, 1]",
                0.5 * gamma
            )));
        }
        let spectral = Spectral::new(grid);
        let conv = Convolver::new(
            grid,
            RadialKernel::Riesz { exponent: gamma },
            KernelMethod::FourierSymbol,
        )?;
        let symbol = spectral
            .k_abs()
            .iter()
            .map(|&k| if k == 0.0 { 0.0 } else { k.powf(2.0 * sigma) })
            .collect();
        Ok(Self {
            spectral,
            conv,
            symbol,
        })
    }

    fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    /// `(K∗|u|²) u` for real `u`.
    fn nonlinearity(&self, u: &[f64]) -> Vec<f64> {
        let rho: Vec<f64> = u.iter().map(|v| v * v).collect();
        let pot = self.conv.convolve(&rho);
        pot.iter().zip(u).map(|(p, v)| p * v).collect()
    }

    fn forward(&self, u: &[f64]) -> Vec<C64> {
        let mut c: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.spectral.fft().forward(&mut c, self.grid().dim());
        c
    }

    fn inverse_real(&self, mut c: Vec<C64>) -> Vec<f64> {
        self.spectral.fft().inverse_normalized(&mut c, self.grid().dim());
        c.into_iter().map(|v| v.re).collect()
    }

    /// `S u` for real `u`.
    fn kinetic_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut c = self.forward(u);
        for (v, s) in c.iter_mut().zip(&self.symbol) {
            *v *= s;
        }
        self.inverse_real(c)
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.grid().cell_volume()
    }

    /// Sup norm of `S u + ω u - N(u)`.
    fn residual(&self, u: &[f64], omega: f64) -> f64 {
        let su = self.kinetic_apply(u);
        let nu = self.nonlinearity(u);
        su.iter()
            .zip(u)
            .zip(&nu)
            .map(|((s, v), n)| (s + omega * v - n).abs())
            .fold(0.0, f64::max)
    }

    /// Shifts `u` so that the periodic (circular) barycenter of `u²` sits at
    /// the origin. Profiles even about the origin are left untouched.
    fn center(&self, u: &mut [f64]) {
        let grid = self.grid();
        let dim = grid.dim();
        let x = grid.axis();
        let k1 = grid.dk();
        let mut idx = vec![0; dim];
        let mut moments = vec![C64::new(0.0, 0.0); dim];
        for (flat, v) in u.iter().enumerate() {
            let w = v * v;
            grid.unravel(flat, &mut idx);
            for (c, &j) in moments.iter_mut().zip(&idx) {
                *c += C64::from_polar(w, k1 * x[j]);
            }
        }
        let shift: Vec<f64> = moments.iter().map(|c| c.arg() / k1).collect();
        if shift.iter().all(|s| s.abs() < 1e-6 * grid.spacing()) {
            return;
        }
        let k = grid.wavenumbers();
        let mut c = self.forward(u);
        for (flat, v) in c.iter_mut().enumerate() {
            grid.unravel(flat, &mut idx);
            let phase: f64 = idx.iter().zip(&shift).map(|(&j, &s)| k[j] * s).sum();
            *v *= C64::from_polar(1.0, phase);
        }
        // The Nyquist plane makes the shifted samples slightly complex; the
        // real part is the symmetric interpolant.
        let out = self.inverse_real(c);
        u.copy_from_slice(&out);
    }
}

fn gaussian_guess(grid: &Grid, width: Option<f64>) -> Vec<f64> {
    let w = width.unwrap_or(grid.half_width() / 6.0);
    Field::gaussian(grid, w).values().iter().map(|v| v.re).collect()
}

fn to_field(grid: &Grid, u: Vec<f64>) -> Field {
    Field::new(grid.clone(), u.into_iter().map(|v| C64::new(v, 0.0)).collect())
        .expect("length matches grid")
}

/// Spectral renormalization with stabilizing exponent `3/2`:
/// `û ← M^{3/2} N̂(u) / (|k|^{2σ} + ω)`, `M = ⟨(S+ω)u, u⟩ / ⟨N(u), u⟩`.
pub fn petviashvili_solve(
    gamma: f64,
    sigma: f64,
    grid: &Grid,
    opts: &PetviashviliOptions,
) -> Result<GroundState> {
    if !(opts.omega > 0.0) {
        return Err(Error::invalid(format!("omega = {} must be > 0", opts.omega)));
    }
    let problem = Problem::new(gamma, sigma, grid)?;
    let omega = opts.omega;
    let mut u = gaussian_guess(grid, opts.initial_width);
    let mut history = Vec::new();
    let mut factors: Vec<f64> = Vec::new();

    for it in 1..=opts.max_iter {
        let uh = problem.forward(&u);
        let nu = problem.nonlinearity(&u);
        let nh = problem.forward(&nu);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((a, b), s) in uh.iter().zip(&nh).zip(&problem.symbol) {
            num += (s + omega) * a.norm_sqr();
            den += (a.conj() * b).re;
        }
        let factor = num / den;
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::Divergence {
                iteration: it,
                reason: format!("normalization factor {factor} is not positive"),
            });
        }
        factors.push(factor);
        if oscillating(&factors) {
            return Err(Error::Divergence {
                iteration: it,
                reason: format!("normalization factor oscillates (last {factor:.3e})"),
            });
        }
        let stab = factor.powf(1.5);
        let next: Vec<C64> = nh
            .iter()
            .zip(&problem.symbol)
            .map(|(b, s)| b * (stab / (s + omega)))
            .collect();
        u = problem.inverse_real(next);
        problem.center(&mut u);
        let res = problem.residual(&u, omega);
        history.push(res);
        if !res.is_finite() {
            return Err(Error::Divergence {
                iteration: it,
                reason: "non-finite residual".into(),
            });
        }
        if res <= opts.tol {
            return Ok(GroundState {
                profile: to_field(grid, u),
                gamma,
                sigma,
                omega,
                residual: res,
                iterations: it,
                history,
            });
        }
    }
    let residual = *history.last().unwrap_or(&f64::NAN);
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
        history,
        last: Box::new(to_field(grid, u)),
    })
}

/// Sustained sign alternation of `M - 1` with non-shrinking amplitude.
fn oscillating(factors: &[f64]) -> bool {
    const WINDOW: usize = 40;
    if factors.len() < WINDOW {
        return false;
    }
    let w = &factors[factors.len() - WINDOW..];
    let dev: Vec<f64> = w.iter().map(|f| f - 1.0).collect();
    let alternating = dev.windows(2).all(|p| p[0] * p[1] < 0.0);
    let early = dev[..WINDOW / 2].iter().map(|d| d.abs()).fold(0.0, f64::max);
    let late = dev[WINDOW / 2..].iter().map(|d| d.abs()).fold(0.0, f64::max);
    alternating && late >= early && late > 1e-3
}

#[derive(Clone, Debug)]
pub struct GradientFlowOptions {
    /// Coupling; `0` gives pure kinetic minimization.
    pub lambda: f64,
    pub tau: f64,
    pub max_iter: usize,
    pub initial_width: Option<f64>,
}

impl Default for GradientFlowOptions {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tau: 0.5,
            max_iter: 20000,
            initial_width: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradientFlowResult {
    /// Minimizer at the prescribed mass.
    pub minimizer: Field,
    /// Effective coupling `λ*` at the fixed point. In the critical case the
    /// ground state is `√λ* · minimizer` and `λ_c = λ* · mass`.
    pub coupling: f64,
    /// Lagrange multiplier (the frequency of the fixed point).
    pub omega: f64,
    /// Functional value per accepted iteration.
    pub functional: Vec<f64>,
    /// Final norm of the mass-projected gradient.
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl GradientFlowResult {
    /// The matching solution of `SQ + ωQ = (K∗Q²)Q`.
    pub fn ground_state(&self, gamma: f64, sigma: f64) -> GroundState {
        let profile = self.minimizer.scaled(self.coupling.sqrt());
        GroundState {
            profile,
            gamma,
            sigma,
            omega: self.omega,
            residual: self.gradient_norm,
            iterations: self.iterations,
            history: self.functional.clone(),
        }
    }
}

/// Gradient-flow minimizer, independent of the Petviashvili iteration.
///
/// For `σ > γ/2` (or `λ = 0`) this is the normalized semi-implicit flow
/// `u ← (1 + τS)^{-1}(u + τ λ N(u))` minimizing
/// `E = ½⟨u,Su⟩ - (λ/4)⟨u²,K∗u²⟩` at fixed mass.
///
/// In the critical case `E` is dilation-degenerate and the discrete ratio
/// `D/⟨u,Su⟩` is maximized by grid-scale spikes, so the scale is pinned:
/// the flow ascends `D = ⟨u²,K∗u²⟩` on `{‖u‖² = mass, ⟨u,Su⟩ = κ₀}` with a
/// `(1+S)^{-1}` preconditioned projected gradient. Its stationary points
/// solve `Su + (a/b)u = (1/b)N(u)` exactly, giving `λ* = 1/b`, `ω = a/b`.
/// The recorded functional is `-D/(⟨u,Su⟩·mass)`.
///
/// In both cases the step size halves whenever the functional would increase.
pub fn gradient_flow_minimize(
    gamma: f64,
    sigma: f64,
    grid: &Grid,
    mass: f64,
    tol: f64,
    opts: &GradientFlowOptions,
) -> Result<GradientFlowResult> {
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass = {mass} must be > 0")));
    }
    let problem = Problem::new(gamma, sigma, grid)?;
    if is_critical(gamma, sigma) && opts.lambda > 0.0 {
        return pinned_ascent(&problem, grid, mass, tol, opts);
    }
    let h = grid.cell_volume();

    let normalize = |u: &mut Vec<f64>| {
        let m: f64 = u.iter().map(|v| v * v).sum::<f64>() * h;
        let c = (mass / m).sqrt();
        for v in u.iter_mut() {
            *v *= c;
        }
    };
    let evaluate = |u: &[f64]| -> (f64, f64, Vec<f64>, Vec<f64>) {
        let su = problem.kinetic_apply(u);
        let nu = problem.nonlinearity(u);
        let kin = problem.dot(u, &su);
        let d = problem.dot(u, &nu);
        (0.5 * kin - 0.25 * opts.lambda * d, opts.lambda, su, nu)
    };

    let mut u = gaussian_guess(grid, opts.initial_width);
    normalize(&mut u);
    let (mut f, mut lam, mut su, mut nu) = evaluate(&u);
    let mut functional = vec![f];
    let mut tau = opts.tau;

    for it in 1..=opts.max_iter {
        // Projected gradient g = Su - λN(u) + ω u with ω fixing the mass.
        let omega = (lam * problem.dot(&u, &nu) - problem.dot(&u, &su)) / mass;
        let grad: Vec<f64> = su
            .iter()
            .zip(&nu)
            .zip(&u)
            .map(|((s, n), v)| s - lam * n + omega * v)
            .collect();
        let gnorm = problem.dot(&grad, &grad).sqrt();
        if gnorm <= tol {
            return Ok(GradientFlowResult {
                minimizer: to_field(grid, u),
                coupling: lam,
                omega,
                functional,
                gradient_norm: gnorm,
                iterations: it - 1,
            });
        }
        loop {
            let rhs: Vec<f64> = u.iter().zip(&nu).map(|(v, n)| v + tau * lam * n).collect();
            let mut c = problem.forward(&rhs);
            for (v, s) in c.iter_mut().zip(&problem.symbol) {
                *v /= 1.0 + tau * s;
            }
            let mut cand = problem.inverse_real(c);
            normalize(&mut cand);
            if lam > 0.0 {
                problem.center(&mut cand);
            }
            let (fc, lc, sc, nc) = evaluate(&cand);
            let slack = 1e-13 * f.abs().max(1e-300);
            if fc <= f + slack {
                u = cand;
                f = fc;
                lam = lc;
                su = sc;
                nu = nc;
                functional.push(f);
                break;
            }
            tau *= 0.5;
            if tau < 1e-12 {
                return Err(Error::StepSize {
                    iteration: it,
                    increase: fc - f,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: f64::NAN,
        history: functional,
        last: Box::new(to_field(grid, u)),
    })
}

fn pinned_ascent(
    problem: &Problem,
    grid: &Grid,
    mass: f64,
    tol: f64,
    opts: &GradientFlowOptions,
) -> Result<GradientFlowResult> {
    let precondition = |u: &[f64]| {
        let mut c = problem.forward(u);
        for (v, s) in c.iter_mut().zip(&problem.symbol) {
            *v /= 1.0 + s;
        }
        problem.inverse_real(c)
    };
    let scale_to_mass = |u: &mut Vec<f64>| {
        let c = (mass / problem.dot(u, u)).sqrt();
        u.iter_mut().for_each(|v| *v *= c);
    };

    let mut u = gaussian_guess(grid, opts.initial_width);
    scale_to_mass(&mut u);
    let kappa0 = problem.dot(&u, &problem.kinetic_apply(&u));

    // Newton-type retraction back onto both constraints.
    let retract = |mut v: Vec<f64>| {
        for _ in 0..6 {
            scale_to_mass(&mut v);
            let sv = problem.kinetic_apply(&v);
            let kappa = problem.dot(&v, &sv);
            if ((kappa - kappa0) / kappa0).abs() < 1e-14 {
                break;
            }
            let w: Vec<f64> = sv.iter().zip(&v).map(|(s, x)| s - kappa / mass * x).collect();
            let slope = 2.0 * problem.dot(&sv, &w);
            let step = (kappa0 - kappa) / slope;
            v.iter_mut().zip(&w).for_each(|(x, d)| *x += step * d);
        }
        scale_to_mass(&mut v);
        v
    };
    let evaluate = |u: &[f64]| {
        let su = problem.kinetic_apply(u);
        let nu = problem.nonlinearity(u);
        let f = -problem.dot(u, &nu) / (problem.dot(u, &su) * mass);
        (f, su, nu)
    };

    let (mut f, mut su, mut nu) = evaluate(&u);
    let mut functional = vec![f];
    let mut tau = opts.tau;
    for it in 1..=opts.max_iter {
        let (pu, psu, pn) = (precondition(&u), precondition(&su), precondition(&nu));
        let g11 = problem.dot(&pu, &u);
        let g12 = problem.dot(&psu, &u);
        let g22 = problem.dot(&psu, &su);
        let r1 = problem.dot(&pn, &u);
        let r2 = problem.dot(&pn, &su);
        let det = g11 * g22 - g12 * g12;
        let a = (r1 * g22 - r2 * g12) / det;
        let b = (g11 * r2 - g12 * r1) / det;
        if !(a.is_finite() && b.is_finite() && b > 0.0) {
            return Err(Error::Divergence {
                iteration: it,
                reason: format!("degenerate constraint multipliers a = {a}, b = {b}"),
            });
        }
        let grad: Vec<f64> = nu
            .iter()
            .zip(&u)
            .zip(&su)
            .map(|((n, v), s)| a * v + b * s - n)
            .collect();
        let gnorm = (problem.dot(&grad, &grad) / problem.dot(&nu, &nu)).sqrt();
        if gnorm <= tol {
            return Ok(GradientFlowResult {
                minimizer: to_field(grid, u),
                coupling: 1.0 / b,
                omega: a / b,
                functional,
                gradient_norm: gnorm,
                iterations: it - 1,
            });
        }
        let pg: Vec<f64> = pn
            .iter()
            .zip(&pu)
            .zip(&psu)
            .map(|((n, v), s)| a * v + b * s - n)
            .collect();
        loop {
            let mut cand = retract(u.iter().zip(&pg).map(|(v, g)| v - tau * g).collect());
            problem.center(&mut cand);
            let (fc, sc, nc) = evaluate(&cand);
            if fc <= f + 1e-13 * f.abs() {
                u = cand;
                f = fc;
                su = sc;
                nu = nc;
                functional.push(f);
                // Larger steps overshoot and stall the projected gradient.
                tau = (tau * 1.5).min(1.0);
                break;
            }
            tau *= 0.5;
            if tau < 1e-12 {
                return Err(Error::StepSize {
                    iteration: it,
                    increase: fc - f,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: f64::NAN,
        history: functional,
        last: Box::new(to_field(grid, u)),
    })
}

/// Focusing parameters at the critical coupling of `gs`, used to probe the
/// sharp GNS constant.
pub fn critical_params(gs: &GroundState) -> HartreeParams {
    HartreeParams::new(gs.gamma, gs.sigma, Sign::Focusing, gs.mass())
}

/// `⟨Q,SQ⟩ + ω‖Q‖² - ⟨Q,(K∗Q²)Q⟩`, relative to the interaction term.
pub fn pairing_defect(gs: &GroundState) -> Result<f64> {
    let problem = Problem::new(gs.gamma, gs.sigma, gs.profile.grid())?;
    let u: Vec<f64> = gs.profile.values().iter().map(|v| v.re).collect();
    let kin = problem.dot(&u, &problem.kinetic_apply(&u));
    let d = problem.dot(&u, &problem.nonlinearity(&u));
    Ok((kin + gs.omega * gs.mass() - d).abs() / d)
}

/// GNS ratio of `Q` for the critical exponent pair, with unit coupling.
pub fn ground_state_ratio(gs: &GroundState) -> Result<f64> {
    let params = HartreeParams::new(gs.gamma, gs.sigma, Sign::Focusing, 1.0);
    EnergyEvaluator::new(gs.profile.grid(), &params)?.gns_ratio(&gs.profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_ground_state_converges() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        let gs = petviashvili_solve(0.8, 0.4, &g, &PetviashviliOptions::default()).unwrap();
        assert!(gs.residual <= 1e-10);
        let max = gs.profile.sup();
        assert!(gs.profile.values().iter().all(|v| v.re > -1e-10 * max));
        // even under reflection
        let v = gs.profile.values();
        let c = g.points() / 2;
        for j in 1..c {
            assert!((v[c + j].re - v[c - j].re).abs() < 1e-8 * max);
        }
        assert!(pairing_defect(&gs).unwrap() < 1e-8);
    }

    #[test]
    fn subcritical_critical_mass_is_infinite() {
        let g = Grid::new(1, 128, 30.0).unwrap();
        let gs = petviashvili_solve(0.5, 0.6, &g, &PetviashviliOptions::default()).unwrap();
        assert_eq!(critical_mass(&gs), CriticalMass::Infinite);
        assert_eq!(format!("{}", gs.critical_mass()), "inf");
    }

    #[test]
    fn kinetic_minimizer_is_constant() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let opts = GradientFlowOptions {
            lambda: 0.0,
            tau: 5.0,
            ..Default::default()
        };
        let r = gradient_flow_minimize(0.5, 0.5, &g, 1.0, 1e-10, &opts).unwrap();
        let level = (1.0 / 16.0f64).sqrt();
        for v in r.minimizer.values() {
            assert!((v.re - level).abs() < 1e-8);
        }
        assert!(r.functional.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn critical_mass_serializes_symbolically() {
        let s = serde_json::to_string(&CriticalMass::Infinite).unwrap();
        assert_eq!(s, "\"inf\"");
        let back: CriticalMass = serde_json::from_str(&s).unwrap();
        assert_eq!(back, CriticalMass::Infinite);
    }
}
