use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[-L, L)^dim` sampled with `M` points per axis.
///
/// Positions are stored in natural order (`x_j = -L + j h`), wavenumbers in
/// FFT order (`m = 0, 1, …, M/2 - 1, -M/2, …, -1`, `k = π m / L`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("grid dimension {dim} not in {{1,2,3}}")));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "points per axis must be even and >= 8, got {points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self {
            dim,
            points,
            half_width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Total number of samples, `M^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    /// Quadrature weight `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Wavenumber spacing `π / L`.
    pub fn dk(&self) -> f64 {
        PI / self.half_width
    }

    /// Positions along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|j| -self.half_width + j as f64 * h)
            .collect()
    }

    /// Signed integer mode index for FFT position `j`.
    pub fn mode_index(&self, j: usize) -> i64 {
        let m = self.points as i64;
        let j = j as i64;
        if j < m / 2 {
            j
        } else {
            j - m
        }
    }

    /// Wavenumbers along one axis, FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.points)
            .map(|j| dk * self.mode_index(j) as f64)
            .collect()
    }

    /// Splits a row-major flat index into per-axis indices.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.points;
            flat /= self.points;
        }
    }

    /// `|k|^2` for every Fourier coefficient, flat FFT order.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unravel(flat, &mut idx);
                idx.iter().map(|&j| k[j] * k[j]).sum()
            })
            .collect()
    }

    /// Integer `Σ m_a^2` for every Fourier coefficient, so `|k|^2 = dk^2 · n`.
    pub fn mode_norms(&self) -> Vec<u64> {
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unravel(flat, &mut idx);
                idx.iter()
                    .map(|&j| {
                        let m = self.mode_index(j);
                        (m * m) as u64
                    })
                    .sum()
            })
            .collect()
    }

    /// `|x|^2` for every sample, flat position order.
    pub fn radius_squared(&self) -> Vec<f64> {
        let x = self.axis();
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unravel(flat, &mut idx);
                idx.iter().map(|&j| x[j] * x[j]).sum()
            })
            .collect()
    }

    /// Position of a flat sample.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut idx = vec![0; self.dim];
        self.unravel(flat, &mut idx);
        idx.iter()
            .map(|&j| -self.half_width + j as f64 * h)
            .collect()
    }

    /// Same box with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.points * factor, self.half_width)
    }

    /// Flat indices of samples lying on the lower box faces.
    pub fn boundary_indices(&self) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        (0..self.len())
            .filter(|&flat| {
                self.unravel(flat, &mut idx);
                idx.contains(&0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_points_is_box_length() {
        let g = Grid::new(3, 48, 12.0).unwrap();
        assert_eq!(g.spacing() * 48.0, 24.0);
        assert_eq!(g.len(), 48 * 48 * 48);
    }

    #[test]
    fn wavenumbers_are_dual_to_positions() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let x = g.axis();
        let k = g.wavenumbers();
        // exp(i k_m x_j) must equal the DFT phase up to the constant offset.
        for (m, &km) in k.iter().enumerate() {
            for (j, &xj) in x.iter().enumerate() {
                let lhs = (km * (xj + 4.0)).rem_euclid(2.0 * PI);
                let rhs = (2.0 * PI * (m * j) as f64 / 16.0).rem_euclid(2.0 * PI);
                let d = (lhs - rhs).abs();
                assert!(d < 1e-9 || (2.0 * PI - d) < 1e-9);
            }
        }
        assert_eq!(g.mode_index(8), -8);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 16, 1.0).is_err());
        assert!(Grid::new(1, 7, 1.0).is_err());
        assert!(Grid::new(1, 6, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
    }
}
