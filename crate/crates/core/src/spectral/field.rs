use num_complex::Complex64 as C64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Complex samples of a wave function on a [`Grid`], row-major.
///
/// Amplitudes carry units `L^{-dim/2}`, so the discrete mass
/// `Σ |φ_j|^2 h^dim` is dimensionless.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> C64) -> Self {
        let x = grid.axis();
        let mut idx = vec![0; grid.dim()];
        let mut pos = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (p, &j) in pos.iter_mut().zip(&idx) {
                    *p = x[j];
                }
                f(&pos)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Unit-mass Gaussian `(π w^2)^{-d/4} exp(-|x|^2 / (2 w^2))`.
    pub fn gaussian(grid: &Grid, width: f64) -> Self {
        let d = grid.dim() as f64;
        let norm = (std::f64::consts::PI * width * width).powf(-0.25 * d);
        Self::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            C64::new(norm * (-0.5 * r2 / (width * width)).exp(), 0.0)
        })
    }

    /// `amplitude · exp(i k·x)` for integer mode indices `modes`.
    pub fn plane_wave(grid: &Grid, modes: &[i64], amplitude: C64) -> Self {
        let dk = grid.dk();
        Self::from_fn(grid, |x| {
            let phase: f64 = x.iter().zip(modes).map(|(&xi, &m)| dk * m as f64 * xi).sum();
            amplitude * C64::from_polar(1.0, phase)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("field contains non-finite amplitudes"))
        }
    }

    /// `|φ|^2` pointwise.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Discrete `‖φ‖_2^2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn scale(&mut self, c: C64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(C64::new(c, 0.0));
        out
    }

    /// Rescales to unit mass; returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.l2_norm();
        if n > 0.0 {
            self.scale(C64::new(1.0 / n, 0.0));
        }
        n
    }

    /// Discrete `⟨self, other⟩` (antilinear in `self`).
    pub fn inner(&self, other: &Field) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.grid.cell_volume()
    }

    /// `‖self - other‖_2`.
    pub fn distance(&self, other: &Field) -> f64 {
        (self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.grid.cell_volume())
        .sqrt()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest boundary magnitude relative to the overall maximum; the
    /// periodic truncation is trusted when this is below `1e-8`.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.sup();
        if max == 0.0 {
            return 0.0;
        }
        self.grid
            .boundary_indices()
            .into_iter()
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
            / max
    }

    /// Dilation `ℓ^{exponent} φ(ℓ x)` evaluated from a continuum profile.
    pub fn rescaled_from(
        grid: &Grid,
        ell: f64,
        exponent: f64,
        profile: impl Fn(&[f64]) -> C64,
    ) -> Self {
        let amp = ell.powf(exponent);
        Self::from_fn(grid, |x| {
            let y: Vec<f64> = x.iter().map(|v| v * ell).collect();
            profile(&y) * amp
        })
    }
}
