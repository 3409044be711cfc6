//! Exact bosonic N-body propagation on a tensor grid.
//!
//! The amplitudes of `Ψ(x_1, …, x_N)` are stored as a rank `N·d` tensor with
//! particle 1 as the slowest axis block and normalization
//! `Σ |Ψ|² h^{dN} = 1`. Reduced densities are matrices in the orthonormal
//! cell basis `h^{-d/2} 1_cell`, in which a one-body state `φ` has
//! coefficients `φ h^{d/2}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{step_count, Trajectory};
use crate::error::{Error, Result};
use crate::params::HartreeParams;
use crate::spectral::{Convolver, FftNd, Field, Grid, KernelMethod, RadialKernel};

/// Default bound on the number of stored amplitudes.
pub const DEFAULT_CAPACITY: u128 = 1 << 27;

#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyState {
    n: usize,
    grid: Grid,
    amplitudes: Vec<C64>,
    params: HartreeParams,
}

/// Number of amplitudes for `n` particles on `grid`, checked against `limit`.
pub fn capacity_check(grid: &Grid, n: usize, limit: u128) -> Result<usize> {
    let needed = (grid.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > limit {
        return Err(Error::Capacity { needed, limit });
    }
    Ok(needed as usize)
}

/// Bytes held by one state of `n` particles on `grid`.
pub fn memory_bytes(grid: &Grid, n: usize) -> u128 {
    (grid.len() as u128).pow(n as u32) * std::mem::size_of::<C64>() as u128
}

impl ManyBodyState {
    pub fn new(n: usize, grid: Grid, amplitudes: Vec<C64>, params: HartreeParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("need N >= 2 particles, got {n}")));
        }
        let len = capacity_check(&grid, n, DEFAULT_CAPACITY)?;
        if amplitudes.len() != len {
            return Err(Error::invalid(format!(
                "{} amplitudes supplied, {len} needed for N = {n}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            n,
            grid,
            amplitudes,
            params,
        })
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &HartreeParams {
        &self.params
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn with_params(mut self, params: HartreeParams) -> Self {
        self.params = params;
        self
    }

    /// Tensor rank `N·d`.
    pub fn rank(&self) -> usize {
        self.n * self.grid.dim()
    }

    fn cells(&self) -> usize {
        self.grid.len()
    }

    fn measure(&self) -> f64 {
        self.grid.cell_volume().powi(self.n as i32)
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.measure()).sqrt()
    }

    pub fn normalize(&mut self) {
        let c = 1.0 / self.norm();
        for v in &mut self.amplitudes {
            *v *= c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest `|Ψ - Ψ∘τ|` over adjacent transpositions `τ`, relative to
    /// `max |Ψ|`.
    pub fn symmetry_defect(&self) -> f64 {
        let cells = self.cells();
        let max = self.amplitudes.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for a in 0..self.n - 1 {
            let sa = cells.pow((self.n - 1 - a) as u32);
            let sb = sa / cells;
            for (flat, v) in self.amplitudes.iter().enumerate() {
                let ia = (flat / sa) % cells;
                let ib = (flat / sb) % cells;
                if ia <= ib {
                    continue;
                }
                let swapped = flat - ia * sa - ib * sb + ib * sa + ia * sb;
                worst = worst.max((v - self.amplitudes[swapped]).norm());
            }
        }
        worst / max
    }

    /// Averages over all particle permutations.
    pub fn symmetrize(&mut self) {
        let cells = self.cells();
        let perms = permutations(self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        let mut idx = vec![0usize; self.n];
        for (flat, o) in out.iter_mut().enumerate() {
            unravel(flat, cells, &mut idx);
            let mut acc = C64::new(0.0, 0.0);
            for p in &perms {
                let mut g = 0;
                for &src in p {
                    g = g * cells + idx[src];
                }
                acc += self.amplitudes[g];
            }
            *o = acc / perms.len() as f64;
        }
        self.amplitudes = out;
    }
}

fn unravel(mut flat: usize, cells: usize, out: &mut [usize]) {
    for v in out.iter_mut().rev() {
        *v = flat % cells;
        flat /= cells;
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Advances a row-major counter with `cells` values per digit.
fn increment(idx: &mut [usize], cells: usize) {
    for v in idx.iter_mut().rev() {
        *v += 1;
        if *v < cells {
            return;
        }
        *v = 0;
    }
}

fn check_unit(phi: &Field) -> Result<()> {
    phi.ensure_finite()?;
    if (phi.l2_norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!(
            "one-body state must have ‖φ‖₂ = 1, got {}",
            phi.l2_norm()
        )));
    }
    Ok(())
}

/// `φ₀^{⊗N}`.
pub fn product_state(phi0: &Field, n: usize, params: &HartreeParams) -> Result<ManyBodyState> {
    check_unit(phi0)?;
    let grid = phi0.grid().clone();
    let len = capacity_check(&grid, n, DEFAULT_CAPACITY)?;
    let v = phi0.values();
    let cells = grid.len();
    let mut amps = Vec::with_capacity(len);
    let mut idx = vec![0usize; n];
    for _ in 0..len {
        amps.push(idx.iter().map(|&i| v[i]).product());
        increment(&mut idx, cells);
    }
    ManyBodyState::new(n, grid, amps, *params)
}

/// Normalized `φ⊗χ + χ⊗φ`.
pub fn symmetrized_pair(phi: &Field, chi: &Field, params: &HartreeParams) -> Result<ManyBodyState> {
    if phi.grid() != chi.grid() {
        return Err(Error::invalid("one-body states live on different grids"));
    }
    let a = phi.values();
    let b = chi.values();
    let m = a.len();
    let mut amps = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            amps[i * m + j] = a[i] * b[j] + b[i] * a[j];
        }
    }
    let mut s = ManyBodyState::new(2, phi.grid().clone(), amps, *params)?;
    s.normalize();
    Ok(s)
}

/// Random bosonic state, reproducible from `seed`.
pub fn random_symmetric_state(
    grid: &Grid,
    n: usize,
    params: &HartreeParams,
    seed: u64,
) -> Result<ManyBodyState> {
    let len = capacity_check(grid, n, DEFAULT_CAPACITY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut s = ManyBodyState::new(n, grid.clone(), amps, *params)?;
    s.symmetrize();
    s.normalize();
    Ok(s)
}

/// Strang propagator for `H = Σ S_i + μλ/(N-1) Σ_{i<j} w(x_i - x_j)` with
/// `w = 1/(|x|^γ + α)` evaluated at exact (non-periodic) separations.
pub struct ManyBodyPropagator {
    n: usize,
    grid: Grid,
    params: HartreeParams,
    fft: FftNd,
    /// `|k|^{2σ}` per one-body Fourier coefficient.
    symbol: Vec<f64>,
    /// `w(x_a - x_b)` for every pair of one-body cells.
    pair: Vec<f64>,
}

impl ManyBodyPropagator {
    pub fn new(n: usize, grid: &Grid, params: &HartreeParams) -> Result<Self> {
        params.validate()?;
        if !(params.alpha > 0.0) {
            return Err(Error::config(
                "many-body runs need the regularized interaction (alpha > 0)",
            ));
        }
        if n < 2 {
            return Err(Error::invalid(format!("need N >= 2 particles, got {n}")));
        }
        let kernel = RadialKernel::Regularized {
            gamma: params.gamma,
            alpha: params.alpha,
        };
        let cells = grid.len();
        let mut pair = vec![0.0; cells * cells];
        for a in 0..cells {
            let xa = grid.position(a);
            for b in 0..cells {
                let xb = grid.position(b);
                let r = xa.iter().zip(&xb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                pair[a * cells + b] = kernel.value(r);
            }
        }
        let symbol = grid
            .k_squared()
            .into_iter()
            .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(params.sigma) })
            .collect();
        Ok(Self {
            n,
            grid: grid.clone(),
            params: *params,
            fft: FftNd::new(grid.points()),
            symbol,
            pair,
        })
    }

    fn coupling(&self) -> f64 {
        self.params.coupling() / (self.n - 1) as f64
    }

    fn rank(&self) -> usize {
        self.n * self.grid.dim()
    }

    fn pair_sum(&self, idx: &[usize]) -> f64 {
        let cells = self.grid.len();
        let mut w = 0.0;
        for a in 0..self.n {
            let row = &self.pair[idx[a] * cells..(idx[a] + 1) * cells];
            for &b in &idx[a + 1..] {
                w += row[b];
            }
        }
        w
    }

    fn kinetic_phase(&self, psi: &mut [C64], dt: f64) {
        let cells = self.grid.len();
        let phase: Vec<C64> = self
            .symbol
            .iter()
            .map(|s| C64::from_polar(1.0, -s * dt))
            .collect();
        self.fft.forward(psi, self.rank());
        let mut idx = vec![0usize; self.n];
        for v in psi.iter_mut() {
            let mut p = phase[idx[0]];
            for &i in &idx[1..] {
                p *= phase[i];
            }
            *v *= p;
            increment(&mut idx, cells);
        }
        self.fft.inverse_normalized(psi, self.rank());
    }

    fn interaction_phase(&self, psi: &mut [C64], dt: f64) {
        let cells = self.grid.len();
        let c = self.coupling() * dt;
        let mut idx = vec![0usize; self.n];
        for v in psi.iter_mut() {
            *v *= C64::from_polar(1.0, -c * self.pair_sum(&idx));
            increment(&mut idx, cells);
        }
    }

    /// `⟨Ψ, Σ S_i Ψ⟩`.
    pub fn kinetic_expectation(&self, psi: &ManyBodyState) -> f64 {
        let cells = self.grid.len();
        let mut c = psi.amplitudes.clone();
        self.fft.forward(&mut c, self.rank());
        let mut idx = vec![0usize; self.n];
        let mut acc = 0.0;
        for v in &c {
            let s: f64 = idx.iter().map(|&i| self.symbol[i]).sum();
            acc += s * v.norm_sqr();
            increment(&mut idx, cells);
        }
        acc * psi.measure() / c.len() as f64
    }

    /// `⟨Ψ, (1/(N-1)) Σ_{i<j} w Ψ⟩` without `μλ`.
    pub fn interaction_expectation(&self, psi: &ManyBodyState) -> f64 {
        let cells = self.grid.len();
        let mut idx = vec![0usize; self.n];
        let mut acc = 0.0;
        for v in &psi.amplitudes {
            acc += v.norm_sqr() * self.pair_sum(&idx);
            increment(&mut idx, cells);
        }
        acc * psi.measure() / (self.n - 1) as f64
    }

    /// `⟨Ψ, H_N Ψ⟩`.
    pub fn energy(&self, psi: &ManyBodyState) -> f64 {
        self.kinetic_expectation(psi) + self.params.coupling() * self.interaction_expectation(psi)
    }

    /// One Strang step.
    pub fn step(&self, psi: &mut ManyBodyState, dt: f64) {
        self.kinetic_phase(&mut psi.amplitudes, 0.5 * dt);
        self.interaction_phase(&mut psi.amplitudes, dt);
        self.kinetic_phase(&mut psi.amplitudes, 0.5 * dt);
    }
}

/// `min(0, Nμλ/(2α))`. The interaction term is bounded below by
/// `Nμλ/(2α)` only when focusing; otherwise `H ≥ Σ S_i ≥ 0`.
pub fn hamiltonian_lower_bound(n: usize, params: &HartreeParams) -> f64 {
    (n as f64 * params.coupling() / (2.0 * params.alpha)).min(0.0)
}

#[derive(Clone, Debug)]
pub struct MbEvolveOptions {
    pub dt: f64,
    /// Call the observer every `sample_every` steps (and at the end).
    pub sample_every: usize,
}

/// Evolves `psi` over `[0, horizon]`. Adjacent kinetic half steps between
/// samples are merged, so a step costs one forward and one inverse FFT.
/// `observe(t, Ψ_t)` runs at `t = 0`, every sample, and the final time.
pub fn mb_evolve(
    psi: &ManyBodyState,
    horizon: f64,
    opts: &MbEvolveOptions,
    mut observe: impl FnMut(f64, &ManyBodyState) -> Result<()>,
) -> Result<ManyBodyState> {
    let prop = ManyBodyPropagator::new(psi.n, &psi.grid, &psi.params)?;
    let dt = opts.dt;
    let steps = step_count(horizon, dt)?;
    let every = opts.sample_every.max(1);
    let mut state = psi.clone();
    observe(0.0, &state)?;
    if steps == 0 {
        return Ok(state);
    }
    let mut last_good = state.clone();
    prop.kinetic_phase(&mut state.amplitudes, 0.5 * dt);
    for n in 1..=steps {
        prop.interaction_phase(&mut state.amplitudes, dt);
        let sample = n % every == 0 || n == steps;
        if sample {
            prop.kinetic_phase(&mut state.amplitudes, 0.5 * dt);
            let t = n as f64 * dt;
            if !state.is_finite() {
                return Err(Error::ManyBodyFailure {
                    step: n,
                    time: t,
                    reason: "non-finite amplitude".into(),
                    last_good: Box::new(last_good),
                });
            }
            observe(t, &state)?;
            if n < steps {
                last_good.amplitudes.copy_from_slice(&state.amplitudes);
                prop.kinetic_phase(&mut state.amplitudes, 0.5 * dt);
            }
        } else {
            prop.kinetic_phase(&mut state.amplitudes, dt);
        }
    }
    Ok(state)
}

/// Samples of a many-body trajectory, kept in memory.
pub fn mb_trajectory(
    psi: &ManyBodyState,
    horizon: f64,
    opts: &MbEvolveOptions,
) -> Result<Vec<(f64, ManyBodyState)>> {
    let mut out = Vec::new();
    mb_evolve(psi, horizon, opts, |t, s| {
        out.push((t, s.clone()));
        Ok(())
    })?;
    Ok(out)
}

/// `γ^{(k)}` as a Hermitian matrix in the orthonormal cell basis.
#[derive(Clone, Debug)]
pub struct ReducedDensity {
    pub k: usize,
    pub grid: Grid,
    pub matrix: DMatrix<C64>,
}

impl ReducedDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|v| v.re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// Partial trace over particles `k+1, …, N`.
pub fn reduce_density(psi: &ManyBodyState, k: usize) -> Result<ReducedDensity> {
    if k == 0 || k >= psi.n {
        return Err(Error::invalid(format!("k = {k} must be in [1, N) with N = {}", psi.n)));
    }
    let dim = psi.cells().pow(k as u32);
    let rest = psi.amplitudes.len() / dim;
    let a = &psi.amplitudes;
    let w = psi.measure();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        let ri = &a[i * rest..(i + 1) * rest];
        for j in i..dim {
            let rj = &a[j * rest..(j + 1) * rest];
            let s: C64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum::<C64>() * w;
            m[(i, j)] = s;
            m[(j, i)] = s.conj();
        }
    }
    Ok(ReducedDensity {
        k,
        grid: psi.grid.clone(),
        matrix: m,
    })
}

pub fn reduce_density_1(psi: &ManyBodyState) -> ReducedDensity {
    reduce_density(psi, 1).expect("N >= 2")
}

/// Coefficients of `φ^{⊗k}` in the orthonormal cell basis.
pub fn projector_vector(phi: &Field, k: usize) -> Vec<C64> {
    let s = phi.grid().cell_volume().sqrt();
    let v: Vec<C64> = phi.values().iter().map(|x| x * s).collect();
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..k {
        out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    }
    out
}

/// `a = 1 - ‖(⟨φ| ⊗ 1) Ψ‖²`, computed directly from the tensor.
pub fn pickl_functional(psi: &ManyBodyState, phi: &Field) -> Result<f64> {
    check_unit(phi)?;
    if phi.grid() != &psi.grid {
        return Err(Error::invalid("one-body state and many-body state use different grids"));
    }
    let cells = psi.cells();
    let rest = psi.amplitudes.len() / cells;
    let h = psi.grid.cell_volume();
    let mut chi = vec![C64::new(0.0, 0.0); rest];
    for (i, p) in phi.values().iter().enumerate() {
        let c = p.conj() * h;
        for (x, a) in chi.iter_mut().zip(&psi.amplitudes[i * rest..(i + 1) * rest]) {
            *x += c * a;
        }
    }
    let overlap = chi.iter().map(|v| v.norm_sqr()).sum::<f64>() * h.powi(psi.n as i32 - 1);
    Ok(clamp_unit(1.0 - overlap))
}

/// `1 - ⟨φ, γ^{(1)} φ⟩`.
pub fn pickl_from_density(rho: &ReducedDensity, phi: &Field) -> Result<f64> {
    check_unit(phi)?;
    let v = DMatrixVec::from(projector_vector(phi, rho.k));
    let gv = &rho.matrix * &v.0;
    let q: C64 = v.0.iter().zip(gv.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(clamp_unit(1.0 - q.re))
}

struct DMatrixVec(nalgebra::DVector<C64>);

impl From<Vec<C64>> for DMatrixVec {
    fn from(v: Vec<C64>) -> Self {
        DMatrixVec(nalgebra::DVector::from_vec(v))
    }
}

fn clamp_unit(a: f64) -> f64 {
    if (-1e-12..0.0).contains(&a) {
        0.0
    } else if (1.0..1.0 + 1e-12).contains(&a) {
        1.0
    } else {
        a
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-15, 100 * n.max(10)).ok_or_else(|| {
        let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Error::Eigen(format!(
            "Hermitian eigensolver did not converge ({n}x{n}, max entry {scale:e})"
        ))
    })?;
    Ok(eig.eigenvalues.iter().cloned().collect())
}

fn difference(rho: &ReducedDensity, phi: &Field) -> Result<DMatrix<C64>> {
    if phi.grid() != &rho.grid {
        return Err(Error::invalid("one-body state and density use different grids"));
    }
    let v = nalgebra::DVector::from_vec(projector_vector(phi, rho.k));
    Ok(&rho.matrix - &v * v.adjoint())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchattenDistances {
    pub trace_norm: f64,
    pub hs_norm: f64,
}

/// Trace and Hilbert-Schmidt norms of `γ - |φ^{⊗k}⟩⟨φ^{⊗k}|`.
pub fn schatten_distances(rho: &ReducedDensity, phi: &Field) -> Result<SchattenDistances> {
    let d = difference(rho, phi)?;
    let hs_norm = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let trace_norm = hermitian_eigenvalues(&d)?.iter().map(|l| l.abs()).sum();
    Ok(SchattenDistances {
        trace_norm,
        hs_norm,
    })
}

/// Unitary DFT applied to both indices: `F A F†`.
fn fourier_conjugate(a: &DMatrix<C64>, grid: &Grid) -> DMatrix<C64> {
    let n = a.nrows();
    let fft = FftNd::new(grid.points());
    let rank = grid.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let transform_columns = |m: &DMatrix<C64>| {
        let mut out = m.clone();
        for mut col in out.column_iter_mut() {
            let mut buf: Vec<C64> = col.iter().cloned().collect();
            fft.forward(&mut buf, rank);
            for (c, b) in col.iter_mut().zip(buf) {
                *c = b * scale;
            }
        }
        out
    };
    let fa = transform_columns(a);
    transform_columns(&fa.adjoint()).adjoint()
}

/// `Tr|S^{1/2}(γ^{(1)} - P)S^{1/2}|` with `S = (1 + (-Δ)^σ)^θ`.
pub fn weighted_trace_distance(rho: &ReducedDensity, phi: &Field, theta: f64, sigma: f64) -> Result<f64> {
    if rho.k != 1 {
        return Err(Error::invalid("weighted trace distance is implemented for k = 1"));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::invalid(format!("theta = {theta} must be >= 0")));
    }
    let d = difference(rho, phi)?;
    if theta == 0.0 {
        return Ok(hermitian_eigenvalues(&d)?.iter().map(|l| l.abs()).sum());
    }
    let w = sobolev_weights(&rho.grid, sigma, 0.5 * theta);
    let mut f = fourier_conjugate(&d, &rho.grid);
    for i in 0..f.nrows() {
        for j in 0..f.ncols() {
            f[(i, j)] *= w[i] * w[j];
        }
    }
    Ok(hermitian_eigenvalues(&f)?.iter().map(|l| l.abs()).sum())
}

/// `(1 + |k|^{2σ})^{p}` per Fourier coefficient.
fn sobolev_weights(grid: &Grid, sigma: f64, p: f64) -> Vec<f64> {
    grid.k_squared()
        .into_iter()
        .map(|k2| (1.0 + k2.powf(sigma)).powf(p))
        .collect()
}

/// `Tr[(1 + S)^s γ^{(1)}] = ‖S_{1,s}^{1/2} Ψ‖₂²`.
pub fn one_body_sobolev_moment(rho: &ReducedDensity, sigma: f64, s: f64) -> f64 {
    let f = fourier_conjugate(&rho.matrix, &rho.grid);
    let w = sobolev_weights(&rho.grid, sigma, s);
    f.diagonal().iter().zip(&w).map(|(v, w)| v.re * w).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub theta: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pickl: f64,
    pub hs_norm: f64,
    pub constant: f64,
    pub pass: bool,
}

/// `Tr|S_{1,θs}^{1/2}(γ - P)S_{1,θs}^{1/2}| ≤ C (a^{min(1/2,1-θ)} + ‖γ-P‖_HS^{1-θ})`
/// with `C = 2(‖S_{1,s}^{1/2}Ψ‖ + ‖S^{s/2}φ‖)^{max(1,2θ)}` and `k = 1`.
pub fn interpolation_bound_check(
    psi: &ManyBodyState,
    phi: &Field,
    theta: f64,
    s: f64,
    sigma: f64,
) -> Result<InterpolationCheck> {
    let rho = reduce_density_1(psi);
    interpolation_bound_from_density(&rho, psi, phi, theta, s, sigma)
}

pub fn interpolation_bound_from_density(
    rho: &ReducedDensity,
    psi: &ManyBodyState,
    phi: &Field,
    theta: f64,
    s: f64,
    sigma: f64,
) -> Result<InterpolationCheck> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta = {theta} not in [0, 1)")));
    }
    if !(s >= 0.0) {
        return Err(Error::invalid(format!("s = {s} must be >= 0")));
    }
    let lhs = weighted_trace_distance(rho, phi, theta * s, sigma)?;
    let pickl = pickl_functional(psi, phi)?;
    let hs_norm = schatten_distances(rho, phi)?.hs_norm;
    let psi_norm = one_body_sobolev_moment(rho, sigma, s).sqrt();
    let spectral = crate::spectral::Spectral::new(phi.grid());
    let phi_norm = spectral
        .weighted_mass(phi, |k| if k == 0.0 { 0.0 } else { k.powf(sigma * s) })
        .sqrt();
    let phi_norm = if s == 0.0 { phi.l2_norm() } else { phi_norm };
    let constant = 2.0 * (psi_norm + phi_norm).powf(1f64.max(2.0 * theta));
    let rhs = constant * (pickl.powf(0.5f64.min(1.0 - theta)) + hs_norm.powf(1.0 - theta));
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(InterpolationCheck {
        theta,
        s,
        lhs,
        rhs,
        ratio,
        pickl,
        hs_norm,
        constant,
        pass: ratio <= 1.0,
    })
}

/// `∫ ‖K₂ ∗ |φ_τ|²‖_∞^{1/2} dτ` over the stored fields, with
/// `K₂ = |x|^{-2γ}` or `(|x|^γ + α)^{-2}` when regularized.
pub fn sup_potential_integral(traj: &Trajectory) -> Result<f64> {
    let p = &traj.params;
    let kernel = if p.alpha > 0.0 {
        RadialKernel::RegularizedSquared {
            gamma: p.gamma,
            alpha: p.alpha,
        }
    } else {
        if 2.0 * p.gamma >= traj.grid.dim() as f64 {
            return Err(Error::config(format!(
                "|x|^(-2γ) with γ = {} is not locally integrable in dim {}",
                p.gamma,
                traj.grid.dim()
            )));
        }
        RadialKernel::Riesz {
            exponent: 2.0 * p.gamma,
        }
    };
    let method = if p.alpha > 0.0 {
        KernelMethod::PaddedRealKernel
    } else {
        KernelMethod::FourierSymbol
    };
    let conv = Convolver::new(&traj.grid, kernel, method)?;
    let values: Vec<(f64, f64)> = traj
        .stored
        .iter()
        .map(|(t, f)| {
            let v = conv.convolve(&f.density());
            (*t, v.iter().map(|x| x.abs()).fold(0.0, f64::max).sqrt())
        })
        .collect();
    Ok(values
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Sign;

    fn params() -> HartreeParams {
        HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5)
    }

    fn grid() -> Grid {
        Grid::new(1, 8, 4.0).unwrap()
    }

    #[test]
    fn product_state_entries_factor() {
        let g = grid();
        let mut phi = Field::gaussian(&g, 1.0);
        phi.normalize();
        let psi = product_state(&phi, 2, &params()).unwrap();
        let v = phi.values();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(psi.amplitudes()[i * 8 + j], v[i] * v[j]);
            }
        }
        assert_eq!(psi.symmetry_defect(), 0.0);
    }

    #[test]
    fn capacity_is_enforced() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        let phi = Field::gaussian(&g, 1.0);
        match product_state(&phi, 5, &params()) {
            Err(Error::Capacity { needed, limit }) => {
                assert_eq!(needed, 1 << 30);
                assert_eq!(limit, DEFAULT_CAPACITY);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn symmetrize_produces_bosonic_state() {
        let s = random_symmetric_state(&grid(), 3, &params(), 7).unwrap();
        assert!(s.symmetry_defect() < 1e-14);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_of_random_state_is_a_density() {
        let s = random_symmetric_state(&grid(), 3, &params(), 11).unwrap();
        let rho = reduce_density_1(&s);
        assert!(rho.hermiticity_defect() < 1e-14);
        let ev = rho.eigenvalues().unwrap();
        assert!(ev.iter().all(|&l| l > -1e-12));
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let rho2 = reduce_density(&s, 2).unwrap();
        assert!((rho2.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_many_body_flow_is_product_of_free_flows() {
        let g = Grid::new(1, 16, 6.0).unwrap();
        let mut phi = Field::from_fn(&g, |x| C64::from_polar((-x[0] * x[0]).exp(), 0.5 * x[0]));
        phi.normalize();
        let p = HartreeParams::new(1.0, 0.7, Sign::Defocusing, 0.0).with_alpha(0.5);
        let psi = product_state(&phi, 3, &p).unwrap();
        let dt = 0.05;
        let out = mb_evolve(&psi, 0.5, &MbEvolveOptions { dt, sample_every: 3 }, |_, _| Ok(())).unwrap();
        let spectral = crate::spectral::Spectral::new(&g);
        let mut c = spectral.forward(&phi);
        for (v, &k) in c.iter_mut().zip(spectral.k_abs()) {
            *v *= C64::from_polar(1.0, -k.powf(1.4) * 0.5);
        }
        let free = spectral.inverse(c);
        let expected = product_state(&free, 3, &p).unwrap();
        for (a, b) in out.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_unregularized_interaction() {
        let g = grid();
        let p = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0);
        assert!(ManyBodyPropagator::new(2, &g, &p).is_err());
    }

    #[test]
    fn lower_bound_only_binds_when_focusing() {
        let p = params();
        assert_eq!(hamiltonian_lower_bound(4, &p), 0.0);
        let f = p.with_mu(Sign::Focusing);
        assert!((hamiltonian_lower_bound(4, &f) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_conjugation_preserves_trace_norm() {
        let g = grid();
        let s = random_symmetric_state(&g, 2, &params(), 3).unwrap();
        let rho = reduce_density_1(&s);
        let phi = Field::gaussian(&g, 1.0).scaled(1.0 / Field::gaussian(&g, 1.0).l2_norm());
        let a = schatten_distances(&rho, &phi).unwrap().trace_norm;
        let d = difference(&rho, &phi).unwrap();
        let f = fourier_conjugate(&d, &g);
        let b: f64 = hermitian_eigenvalues(&f).unwrap().iter().map(|l| l.abs()).sum();
        assert!((a - b).abs() < 1e-12);
    }
}
