//! Grids, Fourier multipliers, kernel convolutions and norms.

mod energy;
mod fft;
mod field;
mod grid;
mod kernel;
pub mod quadrature;

pub use energy::{energy_functionals, gns_ratio, Energies, EnergyEvaluator};
pub use fft::FftNd;
pub use field::Field;
pub use grid::Grid;
pub use kernel::{
    riesz_symbol_constant, truncated_radial_transform, Convolver, KernelMethod, KernelSpec,
    RadialKernel,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::unit_cell_riesz_average;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevConvention {
    /// `(1 + |k|^2)^{s/2}`.
    StandardHs,
    /// `(1 + |k|^{2σ})^{s/2}`, the symbol of `(1 + (-Δ)^σ)^{s/2}`.
    OperatorWeight,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub sigma: f64,
    pub convention: SobolevConvention,
}

impl SobolevIndex {
    pub fn standard(s: f64) -> Self {
        Self {
            s,
            sigma: 1.0,
            convention: SobolevConvention::StandardHs,
        }
    }

    pub fn operator(r: f64, sigma: f64) -> Self {
        Self {
            s: r,
            sigma,
            convention: SobolevConvention::OperatorWeight,
        }
    }

    pub fn weight(&self, k_abs: f64) -> f64 {
        match self.convention {
            SobolevConvention::StandardHs => (1.0 + k_abs * k_abs).powf(0.5 * self.s),
            SobolevConvention::OperatorWeight => {
                (1.0 + k_abs.powf(2.0 * self.sigma)).powf(0.5 * self.s)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.s.is_finite() || !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::invalid(format!("invalid Sobolev index {self:?}")));
        }
        Ok(())
    }
}

/// Fourier-side operations on one grid; caches the FFT plan and `|k|`.
#[derive(Clone, Debug)]
pub struct Spectral {
    grid: Grid,
    fft: FftNd,
    k_abs: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            fft: FftNd::new(grid.points()),
            k_abs: grid.k_squared().into_iter().map(f64::sqrt).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fft(&self) -> &FftNd {
        &self.fft
    }

    /// `|k|` per Fourier coefficient, FFT order.
    pub fn k_abs(&self) -> &[f64] {
        &self.k_abs
    }

    /// Unnormalized DFT of the samples.
    pub fn forward(&self, f: &Field) -> Vec<C64> {
        let mut c = f.values().to_vec();
        self.fft.forward(&mut c, self.grid.dim());
        c
    }

    /// Inverse of [`Spectral::forward`].
    pub fn inverse(&self, mut coeffs: Vec<C64>) -> Field {
        self.fft.inverse_normalized(&mut coeffs, self.grid.dim());
        Field::new(self.grid.clone(), coeffs).expect("coefficient length matches grid")
    }

    pub fn apply_multiplier(&self, f: &Field, symbol: impl Fn(f64) -> f64) -> Field {
        let mut c = self.forward(f);
        for (v, &k) in c.iter_mut().zip(&self.k_abs) {
            *v *= symbol(k);
        }
        self.inverse(c)
    }

    /// Sum of `w(|k|)^2 |f̂_k|^2` with the Parseval scaling, i.e. `‖w(D) f‖_2^2`.
    pub fn weighted_mass(&self, f: &Field, weight: impl Fn(f64) -> f64) -> f64 {
        let c = self.forward(f);
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        c.iter()
            .zip(&self.k_abs)
            .map(|(v, &k)| {
                let w = weight(k);
                w * w * v.norm_sqr()
            })
            .sum::<f64>()
            * scale
    }

    /// `(-Δ)^σ f`, zero mode mapped to zero.
    pub fn frac_laplacian(&self, f: &Field, sigma: f64) -> Result<Field> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::invalid(format!("sigma = {sigma} not in (0, 1]")));
        }
        f.ensure_finite()?;
        Ok(self.apply_multiplier(f, |k| if k == 0.0 { 0.0 } else { k.powf(2.0 * sigma) }))
    }

    pub fn sobolev_weight(&self, f: &Field, idx: SobolevIndex) -> Result<Field> {
        idx.validate()?;
        Ok(self.apply_multiplier(f, |k| idx.weight(k)))
    }

    /// Mass computed on the Fourier side (Parseval).
    pub fn fourier_mass(&self, f: &Field) -> f64 {
        self.weighted_mass(f, |_| 1.0)
    }

    pub fn sobolev_norm(&self, f: &Field, idx: SobolevIndex) -> Result<f64> {
        idx.validate()?;
        Ok(self.weighted_mass(f, |k| idx.weight(k)).sqrt())
    }

    /// `‖f‖_{H^s}` with the standard `(1+|k|^2)^{s/2}` weight.
    pub fn hs_norm(&self, f: &Field, s: f64) -> f64 {
        self.weighted_mass(f, |k| (1.0 + k * k).powf(0.5 * s)).sqrt()
    }

    /// `‖|D|^s f‖_2`. For `s < 0` the origin cell uses the cell average of
    /// `|k|^{2s}` instead of the divergent point value.
    pub fn homogeneous_sobolev_norm(&self, f: &Field, s: f64) -> f64 {
        if s == 0.0 {
            return self.fourier_mass(f).sqrt();
        }
        let zero_weight = if s < 0.0 {
            let d = self.grid.dim();
            let beta = -2.0 * s;
            if beta < d as f64 {
                (unit_cell_riesz_average(d, beta) * self.grid.dk().powf(-beta)).sqrt()
            } else {
                f64::INFINITY
            }
        } else {
            0.0
        };
        self.weighted_mass(f, |k| if k == 0.0 { zero_weight } else { k.powf(s) })
            .sqrt()
    }

    /// `‖f‖_{L^p}`, `p ∈ [1, ∞]`.
    pub fn lp_norm(&self, f: &Field, p: f64) -> Result<f64> {
        lp_norm(f, p)
    }

    /// `‖(1+|k|^2)^{s/2} f‖_{L^r}`.
    pub fn w_sr_norm(&self, f: &Field, s: f64, r: f64) -> Result<f64> {
        if s == 0.0 {
            return lp_norm(f, r);
        }
        let g = self.apply_multiplier(f, |k| (1.0 + k * k).powf(0.5 * s));
        lp_norm(&g, r)
    }
}

impl Spectral {
    /// `x ↦ f(ℓ x)` by trigonometric interpolation, one axis at a time.
    /// Points mapped outside the box wrap periodically.
    pub fn dilate(&self, f: &Field, ell: f64) -> Field {
        let m = self.grid.points();
        let x = self.grid.axis();
        let k: Vec<f64> = self.grid.wavenumbers();
        let nyquist = std::f64::consts::PI / self.grid.spacing();
        let mut a = vec![C64::new(0.0, 0.0); m * m];
        for j in 0..m {
            let y = ell * x[j];
            for n in 0..m {
                let d = y - x[n];
                let mut s = C64::new(0.0, 0.0);
                for &km in &k {
                    if km.abs() < nyquist * (1.0 - 1e-12) {
                        s += C64::from_polar(1.0, km * d);
                    }
                }
                s += (nyquist * d).cos();
                a[j * m + n] = s / m as f64;
            }
        }
        let dim = self.grid.dim();
        let mut data = f.values().to_vec();
        let mut line = vec![C64::new(0.0, 0.0); m];
        for axis in 0..dim {
            let stride = m.pow((dim - 1 - axis) as u32);
            let block = stride * m;
            for start in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for (n, v) in line.iter_mut().enumerate() {
                        *v = data[base + n * stride];
                    }
                    for j in 0..m {
                        let row = &a[j * m..(j + 1) * m];
                        data[base + j * stride] =
                            row.iter().zip(&line).map(|(c, v)| c * v).sum();
                    }
                }
            }
        }
        Field::new(self.grid.clone(), data).expect("length preserved")
    }
}

pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(f.sup());
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p = {p} not in [1, ∞]")));
    }
    let s: f64 = f.values().iter().map(|v| v.norm().powf(p)).sum();
    Ok((s * f.grid().cell_volume()).powf(1.0 / p))
}

/// `(-Δ)^σ f` on a fresh plan.
pub fn frac_laplacian_apply(f: &Field, sigma: f64) -> Result<Field> {
    Spectral::new(f.grid()).frac_laplacian(f, sigma)
}

pub fn sobolev_weight_apply(f: &Field, idx: SobolevIndex) -> Result<Field> {
    Spectral::new(f.grid()).sobolev_weight(f, idx)
}

/// `|x|^{-γ} ∗ ρ` through the Fourier symbol.
pub fn riesz_convolve(rho: &[f64], grid: &Grid, gamma: f64) -> Result<Vec<f64>> {
    if gamma >= grid.dim() as f64 {
        return Err(Error::config(format!(
            "gamma = {gamma} >= dim = {}: the Riesz symbol is not locally integrable; use regularized_convolve",
            grid.dim()
        )));
    }
    let conv = Convolver::new(
        grid,
        RadialKernel::Riesz { exponent: gamma },
        KernelMethod::FourierSymbol,
    )?;
    Ok(conv.convolve(rho))
}

/// `1/(|x|^γ + α) ∗ ρ`, linear convolution on the zero-padded doubled grid.
pub fn regularized_convolve(rho: &[f64], grid: &Grid, gamma: f64, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::config(format!("regularized_convolve needs alpha > 0, got {alpha}")));
    }
    let conv = Convolver::new(
        grid,
        RadialKernel::Regularized { gamma, alpha },
        KernelMethod::PaddedRealKernel,
    )?;
    Ok(conv.convolve(rho))
}

/// `‖ ‖f(t)‖_{W^{s,r}} ‖_{L^q(dt)}` by the trapezoidal rule on uniformly
/// spaced samples.
pub fn mixed_spacetime_norm(traj: &[(f64, Field)], q: f64, s: f64, r: f64) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("q = {q} not in [1, ∞]")));
    }
    let spectral = Spectral::new(traj[0].1.grid());
    let values = traj
        .iter()
        .map(|(_, f)| spectral.w_sr_norm(f, s, r))
        .collect::<Result<Vec<f64>>>()?;
    if q.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    if traj.len() == 1 {
        return Ok(0.0);
    }
    let integral: f64 = traj
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1].0 - t[0].0) * (v[0].powf(q) + v[1].powf(q)))
        .sum();
    Ok(integral.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(m: usize, l: f64) -> Grid {
        Grid::new(1, m, l).unwrap()
    }

    #[test]
    fn constant_field_has_zero_fractional_laplacian() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::from_fn(&g, |_| C64::new(2.5, -1.0));
        let out = frac_laplacian_apply(&f, 0.7).unwrap();
        assert!(out.sup() < 1e-12);
    }

    #[test]
    fn plane_wave_is_multiplier_eigenfunction() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::plane_wave(&g, &[2, -3], C64::new(0.5, 0.2));
        let sigma = 0.35;
        let k = g.dk() * 13f64.sqrt();
        let out = frac_laplacian_apply(&f, sigma).unwrap();
        let factor = k.powf(2.0 * sigma);
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b * factor).norm() < 1e-11);
        }
        let idx = SobolevIndex::operator(1.3, sigma);
        let w = sobolev_weight_apply(&f, idx).unwrap();
        let factor = (1.0 + k.powf(2.0 * sigma)).powf(0.65);
        for (a, b) in w.values().iter().zip(f.values()) {
            assert!((a - b * factor).norm() < 1e-11);
        }
    }

    #[test]
    fn laplacian_matches_fourth_order_finite_differences() {
        // σ = 1 on a Gaussian against the 5-point stencil; the stencil error
        // O(h^4) is well below 1e-4 at h = 1/8.
        let g = grid1(256, 16.0);
        let f = Field::gaussian(&g, 1.0);
        let lap = frac_laplacian_apply(&f, 1.0).unwrap();
        let h = g.spacing();
        let v = f.values();
        let m = g.points();
        let mut max_err: f64 = 0.0;
        let mut max_ref: f64 = 0.0;
        for j in 0..m {
            let at = |o: i64| v[((j as i64 + o).rem_euclid(m as i64)) as usize].re;
            let fd = -(-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h);
            max_err = max_err.max((lap.values()[j].re - fd).abs());
            max_ref = max_ref.max(fd.abs());
        }
        assert!(max_err / max_ref < 1e-4, "rel err {}", max_err / max_ref);
    }

    #[test]
    fn sobolev_weight_inverse_pair() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let f = Field::gaussian(&g, 1.2);
        let up = sobolev_weight_apply(&f, SobolevIndex::operator(0.8, 0.5)).unwrap();
        let back = sobolev_weight_apply(&up, SobolevIndex::operator(-0.8, 0.5)).unwrap();
        assert!(back.distance(&f) / f.l2_norm() < 1e-12);
        let same = sobolev_weight_apply(&f, SobolevIndex::operator(0.0, 0.5)).unwrap();
        assert!(same.distance(&f) < 1e-13);
    }

    #[test]
    fn gaussian_has_unit_mass_and_parseval_holds() {
        let g = Grid::new(3, 32, 10.0).unwrap();
        let f = Field::gaussian(&g, 1.0);
        assert!((f.mass() - 1.0).abs() < 1e-6);
        let sp = Spectral::new(&g);
        assert!((sp.fourier_mass(&f) - f.mass()).abs() / f.mass() < 1e-12);
        let h0 = sp.sobolev_norm(&f, SobolevIndex::standard(0.0)).unwrap();
        assert!((h0 - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_of_plane_wave_is_amplitude() {
        let g = grid1(32, 5.0);
        let f = Field::plane_wave(&g, &[3], C64::new(0.0, 1.7));
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.7).abs() < 1e-14);
        // ‖e^{ikx}‖_2 = A sqrt(2L).
        assert!((lp_norm(&f, 2.0).unwrap() - 1.7 * 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn riesz_rejects_gamma_at_dimension() {
        let g = grid1(16, 4.0);
        let rho = vec![0.0; 16];
        assert!(matches!(riesz_convolve(&rho, &g, 1.0), Err(Error::Config(_))));
        assert!(riesz_convolve(&rho, &g, 0.5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regularized_convolution_respects_kernel_bound() {
        let g = grid1(64, 8.0);
        let f = Field::gaussian(&g, 0.7);
        let rho = f.density();
        let l1: f64 = rho.iter().sum::<f64>() * g.cell_volume();
        for &alpha in &[0.1, 1.0, 50.0] {
            let v = regularized_convolve(&rho, &g, 1.0, alpha).unwrap();
            let sup = v.iter().cloned().fold(0.0, f64::max);
            assert!(sup <= l1 / alpha * (1.0 + 1e-12));
            if alpha == 50.0 {
                for &x in &v[16..48] {
                    assert!((x * alpha / l1 - 1.0).abs() < 0.1);
                }
            }
        }
    }

    #[test]
    fn mixed_norm_of_constant_trajectory() {
        let g = grid1(32, 6.0);
        let f = Field::gaussian(&g, 1.0);
        let traj: Vec<(f64, Field)> = (0..=10).map(|i| (0.1 * i as f64, f.clone())).collect();
        let sp = Spectral::new(&g);
        let w = sp.w_sr_norm(&f, 0.5, 3.0).unwrap();
        let q1 = mixed_spacetime_norm(&traj, 1.0, 0.5, 3.0).unwrap();
        assert!((q1 - 1.0 * w).abs() < 1e-12);
        let qi = mixed_spacetime_norm(&traj, f64::INFINITY, 0.5, 3.0).unwrap();
        assert!((qi - w).abs() < 1e-14);
        assert!(mixed_spacetime_norm(&[], 2.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn homogeneous_norm_scaling_is_invariant() {
        // φ_ℓ(x) = ℓ^{(d-γ)/2+σ} φ(ℓx) keeps ‖φ‖_{Ḣ^{s_c}}, s_c = γ/2 - σ.
        let (gamma, sigma) = (1.0, 0.75);
        let sc = 0.5 * gamma - sigma;
        let g = Grid::new(3, 64, 16.0).unwrap();
        let profile = |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            C64::new((-0.5 * r2).exp(), 0.0)
        };
        let exponent = 0.5 * (3.0 - gamma) + sigma;
        let a = Field::rescaled_from(&g, 1.0, exponent, profile);
        let b = Field::rescaled_from(&g, 2.0, exponent, profile);
        let sp = Spectral::new(&g);
        let na = sp.homogeneous_sobolev_norm(&a, sc);
        let nb = sp.homogeneous_sobolev_norm(&b, sc);
        assert!((na - nb).abs() / na < 1e-2, "{na} vs {nb}");
        let _ = PI;
    }
}
