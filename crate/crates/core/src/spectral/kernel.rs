//! Radial interaction kernels and the two convolution routes.
//!
//! `FourierSymbol` multiplies by the exact Fourier transform of the kernel
//! truncated at radius `R` (default `R = L`). For densities supported in the
//! ball of radius `L/2` the periodic result equals the free-space convolution
//! on that ball, and the zero mode is finite. `PaddedRealKernel` samples the
//! kernel on a doubled grid and performs a linear (non-circular) discrete
//! convolution; the singular Riesz kernel gets its analytic cell average at
//! the origin.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use super::fft::FftNd;
use super::grid::Grid;
use super::quadrature::{angular_factor, cell_average_radial, unit_cell_riesz_average, PanelRule};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadialKernel {
    /// `|x|^{-exponent}`.
    Riesz { exponent: f64 },
    /// `1 / (|x|^γ + α)`.
    Regularized { gamma: f64, alpha: f64 },
    /// `1 / (|x|^γ + α)^2`.
    RegularizedSquared { gamma: f64, alpha: f64 },
}

impl RadialKernel {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Riesz { exponent } => r.powf(-exponent),
            RadialKernel::Regularized { gamma, alpha } => 1.0 / (r.powf(gamma) + alpha),
            RadialKernel::RegularizedSquared { gamma, alpha } => {
                let v = 1.0 / (r.powf(gamma) + alpha);
                v * v
            }
        }
    }

    /// Exponent of the algebraic singularity at the origin (0 if bounded).
    pub fn singular_exponent(&self) -> f64 {
        match *self {
            RadialKernel::Riesz { exponent } => exponent,
            _ => 0.0,
        }
    }

    /// `r^β K(r)`, bounded on `[0, ∞)`.
    fn regular_part(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Riesz { .. } => 1.0,
            _ => self.value(r),
        }
    }

    /// Bound on the kernel, if it has one.
    pub fn sup(&self) -> Option<f64> {
        match *self {
            RadialKernel::Riesz { .. } => None,
            RadialKernel::Regularized { alpha, .. } => Some(1.0 / alpha),
            RadialKernel::RegularizedSquared { alpha, .. } => Some(1.0 / (alpha * alpha)),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            RadialKernel::Riesz { exponent } => {
                if !(exponent > 0.0 && exponent < dim as f64) {
                    return Err(Error::config(format!(
                        "Riesz exponent {exponent} must lie in (0, {dim}); use the regularized kernel (alpha > 0) instead"
                    )));
                }
            }
            RadialKernel::Regularized { gamma, alpha }
            | RadialKernel::RegularizedSquared { gamma, alpha } => {
                if !(gamma > 0.0 && alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::config(format!(
                        "regularized kernel needs gamma > 0 and alpha > 0, got gamma = {gamma}, alpha = {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    FourierSymbol,
    PaddedRealKernel,
}

/// Interaction kernel `1/|x|^γ` (α = 0) or `1/(|x|^γ + α)` plus the route used
/// to convolve with it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub gamma: f64,
    pub alpha: f64,
    pub method: KernelMethod,
}

impl KernelSpec {
    /// Default route: Fourier symbol for the Riesz kernel, padded real-space
    /// sampling for the bounded regularized kernel.
    pub fn new(gamma: f64, alpha: f64) -> Self {
        let method = if alpha > 0.0 {
            KernelMethod::PaddedRealKernel
        } else {
            KernelMethod::FourierSymbol
        };
        Self {
            gamma,
            alpha,
            method,
        }
    }

    pub fn with_method(mut self, method: KernelMethod) -> Self {
        self.method = method;
        self
    }

    pub fn kernel(&self) -> RadialKernel {
        if self.alpha > 0.0 {
            RadialKernel::Regularized {
                gamma: self.gamma,
                alpha: self.alpha,
            }
        } else {
            RadialKernel::Riesz {
                exponent: self.gamma,
            }
        }
    }
}

/// Constant in `F[|x|^{-γ}](k) = c |k|^{γ-d}` for `f̂(k) = ∫ f e^{-ik·x} dx`.
///
/// Multiply by `(2π)^{-d/2}` for the unitary convention.
pub fn riesz_symbol_constant(dim: usize, gamma: f64) -> f64 {
    let d = dim as f64;
    std::f64::consts::PI.powf(0.5 * d) * 2f64.powf(d - gamma) * gamma_fn(0.5 * (d - gamma))
        / gamma_fn(0.5 * gamma)
}

/// `∫_{|x|<R} K(|x|) e^{-ik·x} dx` by composite Gauss–Legendre quadrature.
///
/// The substitution `r = R t^p`, `p = 1/(d-β)`, absorbs the `r^{d-1-β}`
/// weight; panels are dyadic in `t` near the origin and subdivided so that no
/// panel spans more than about half an oscillation.
pub fn truncated_radial_transform(kernel: &RadialKernel, dim: usize, k: f64, radius: f64) -> f64 {
    let rule = PanelRule::new(16);
    let d = dim as f64;
    let beta = kernel.singular_exponent();
    let p = 1.0 / (d - beta);
    let prefactor = radius.powf(d - beta) * p;
    let integrand = |t: f64| {
        let r = radius * t.powf(p);
        kernel.regular_part(r) * angular_factor(dim, k * r)
    };
    let mut total = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..64 {
        let lo = 0.5 * hi;
        let dr = radius * (hi.powf(p) - lo.powf(p));
        let pieces = (k * dr / std::f64::consts::FRAC_PI_2).ceil().max(1.0) as usize;
        let width = (hi - lo) / pieces as f64;
        for i in 0..pieces {
            let a = lo + i as f64 * width;
            total += rule.integrate(a, a + width, integrand);
        }
        hi = lo;
    }
    prefactor * total
}

#[derive(Clone, Debug)]
enum Route {
    Symbol {
        fft: FftNd,
        symbol: Vec<f64>,
    },
    Padded {
        fft: FftNd,
        symbol: Vec<C64>,
    },
}

/// Precomputed convolution `ρ ↦ K ∗ ρ` on a fixed grid.
#[derive(Clone, Debug)]
pub struct Convolver {
    grid: Grid,
    kernel: RadialKernel,
    method: KernelMethod,
    route: Route,
}

impl Convolver {
    pub fn new(grid: &Grid, kernel: RadialKernel, method: KernelMethod) -> Result<Self> {
        Self::with_truncation(grid, kernel, method, grid.half_width())
    }

    /// As [`Convolver::new`] with an explicit truncation radius for the
    /// Fourier-symbol route.
    pub fn with_truncation(
        grid: &Grid,
        kernel: RadialKernel,
        method: KernelMethod,
        radius: f64,
    ) -> Result<Self> {
        kernel.validate(grid.dim())?;
        let route = match method {
            KernelMethod::FourierSymbol => Self::symbol_route(grid, &kernel, radius),
            KernelMethod::PaddedRealKernel => Self::padded_route(grid, &kernel)?,
        };
        Ok(Self {
            grid: grid.clone(),
            kernel,
            method,
            route,
        })
    }

    pub fn from_spec(grid: &Grid, spec: &KernelSpec) -> Result<Self> {
        Self::new(grid, spec.kernel(), spec.method)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    fn symbol_route(grid: &Grid, kernel: &RadialKernel, radius: f64) -> Route {
        let norms = grid.mode_norms();
        let dk = grid.dk();
        let scale = 1.0 / grid.len() as f64;
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let symbol = norms
            .iter()
            .map(|&n| {
                *cache.entry(n).or_insert_with(|| {
                    let k = dk * (n as f64).sqrt();
                    truncated_radial_transform(kernel, grid.dim(), k, radius) * scale
                })
            })
            .collect();
        Route::Symbol {
            fft: FftNd::new(grid.points()),
            symbol,
        }
    }

    fn padded_route(grid: &Grid, kernel: &RadialKernel) -> Result<Route> {
        let m = grid.points();
        let p = 2 * m;
        let dim = grid.dim();
        let h = grid.spacing();
        let total = p.pow(dim as u32);
        if total > 1 << 28 {
            return Err(Error::Capacity {
                needed: total as u128,
                limit: 1 << 28,
            });
        }
        let origin = match *kernel {
            RadialKernel::Riesz { exponent } => {
                h.powf(-exponent) * unit_cell_riesz_average(dim, exponent)
            }
            // Cell average: the bounded kernels still vary on scales far below h
            // when alpha is small.
            _ => cell_average_radial(dim, h, |r| kernel.value(r)),
        };
        let mut samples = vec![C64::new(0.0, 0.0); total];
        let mut idx = vec![0usize; dim];
        for (flat, s) in samples.iter_mut().enumerate() {
            let mut f = flat;
            for a in (0..dim).rev() {
                idx[a] = f % p;
                f /= p;
            }
            let r2: f64 = idx
                .iter()
                .map(|&j| {
                    let n = if j < m { j as f64 } else { j as f64 - p as f64 };
                    n * n
                })
                .sum();
            let v = if r2 == 0.0 {
                origin
            } else {
                kernel.value(h * r2.sqrt())
            };
            *s = C64::new(v, 0.0);
        }
        let fft = FftNd::new(p);
        fft.forward(&mut samples, dim);
        let scale = grid.cell_volume() / total as f64;
        for s in samples.iter_mut() {
            *s *= scale;
        }
        Ok(Route::Padded {
            fft,
            symbol: samples,
        })
    }

    /// `K ∗ ρ` sampled on the grid.
    pub fn convolve(&self, rho: &[f64]) -> Vec<f64> {
        assert_eq!(rho.len(), self.grid.len(), "density length mismatch");
        let dim = self.grid.dim();
        match &self.route {
            Route::Symbol { fft, symbol } => {
                let mut work: Vec<C64> = rho.iter().map(|&r| C64::new(r, 0.0)).collect();
                fft.forward(&mut work, dim);
                for (w, &s) in work.iter_mut().zip(symbol) {
                    *w *= s;
                }
                fft.inverse(&mut work, dim);
                work.into_iter().map(|c| c.re).collect()
            }
            Route::Padded { fft, symbol } => {
                let m = self.grid.points();
                let p = 2 * m;
                let mut work = vec![C64::new(0.0, 0.0); symbol.len()];
                for_each_embedded(m, p, dim, |src, dst| work[dst] = C64::new(rho[src], 0.0));
                fft.forward(&mut work, dim);
                for (w, s) in work.iter_mut().zip(symbol) {
                    *w *= s;
                }
                fft.inverse(&mut work, dim);
                let mut out = vec![0.0; rho.len()];
                for_each_embedded(m, p, dim, |src, dst| out[src] = work[dst].re);
                out
            }
        }
    }
}

/// Calls `f(small_index, padded_index)` for every point of an `m^dim` block
/// embedded at the corner of a `p^dim` array.
fn for_each_embedded(m: usize, p: usize, dim: usize, mut f: impl FnMut(usize, usize)) {
    let total = m.pow(dim as u32);
    let mut idx = vec![0usize; dim];
    for src in 0..total {
        let mut s = src;
        for a in (0..dim).rev() {
            idx[a] = s % m;
            s /= m;
        }
        let dst = idx.iter().fold(0usize, |acc, &j| acc * p + j);
        f(src, dst);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn truncated_coulomb_transform_has_closed_form() {
        let kernel = RadialKernel::Riesz { exponent: 1.0 };
        let r = 12.0;
        for &k in &[0.0, 0.1, 0.7, 3.3, 8.4] {
            let exact = if k == 0.0 {
                2.0 * PI * r * r
            } else {
                4.0 * PI * (1.0 - (k * r).cos()) / (k * k)
            };
            let got = truncated_radial_transform(&kernel, 3, k, r);
            assert!((got - exact).abs() < 1e-10 * exact.abs().max(1.0), "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn truncated_transform_in_1d_matches_cosine_integral() {
        // ∫_{-R}^{R} cos(kx)/(|x|+α) dx against a brute-force midpoint sum.
        let kernel = RadialKernel::Regularized {
            gamma: 1.0,
            alpha: 0.5,
        };
        let (k, r) = (1.3, 6.0);
        let n = 2_000_000;
        let h = r / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                2.0 * (k * x).cos() / (x + 0.5) * h
            })
            .sum();
        let got = truncated_radial_transform(&kernel, 1, k, r);
        assert!((got - brute).abs() < 1e-8);
    }

    #[test]
    fn riesz_constant_is_four_pi_for_coulomb() {
        assert!((riesz_symbol_constant(3, 1.0) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn large_k_truncated_symbol_approaches_riesz_symbol() {
        // Averaged over an oscillation the truncated transform tends to c|k|^{γ-d}.
        let gamma = 1.4;
        let kernel = RadialKernel::Riesz { exponent: gamma };
        let r = 12.0;
        let k: f64 = 6.0;
        let exact = riesz_symbol_constant(3, gamma) * k.powf(gamma - 3.0);
        let n = 64;
        let avg: f64 = (0..n)
            .map(|i| {
                let kk = k + (i as f64 + 0.5) / n as f64 * 2.0 * PI / r;
                truncated_radial_transform(&kernel, 3, kk, r) * (kk / k).powf(3.0 - gamma)
            })
            .sum::<f64>()
            / n as f64;
        assert!((avg - exact).abs() / exact < 2e-2, "{avg} vs {exact}");
    }
}
