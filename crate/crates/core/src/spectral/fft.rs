//! Row-major n-dimensional FFT built from 1D `rustfft` plans.
//!
//! Every axis has the same length. Lanes along an axis are gathered into a
//! contiguous tile, transformed in one call, and scattered back, so results
//! do not depend on how blocks are scheduled across threads.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const TILE: usize = 64;

#[derive(Clone)]
pub struct FftNd {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("len", &self.len).finish()
    }
}

impl FftNd {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn axis_len(&self) -> usize {
        self.len
    }

    /// Unnormalized forward transform, `Σ_j f_j e^{-2πi jm/M}` along every axis.
    pub fn forward(&self, data: &mut [C64], rank: usize) {
        self.transform(data, rank, &self.forward);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&self, data: &mut [C64], rank: usize) {
        self.transform(data, rank, &self.inverse);
    }

    /// Inverse transform divided by `M^rank`.
    pub fn inverse_normalized(&self, data: &mut [C64], rank: usize) {
        self.inverse(data, rank);
        let scale = 1.0 / (self.len as f64).powi(rank as i32);
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [C64], rank: usize, plan: &Arc<dyn Fft<f64>>) {
        let m = self.len;
        debug_assert_eq!(data.len(), m.pow(rank as u32));
        for axis in 0..rank {
            let stride = m.pow((rank - 1 - axis) as u32);
            if stride == 1 {
                transform_contiguous(data, plan);
            } else {
                let block = m * stride;
                #[cfg(feature = "parallel")]
                {
                    if data.len() / block > 1 {
                        data.par_chunks_mut(block)
                            .for_each(|b| transform_strided(b, m, stride, plan));
                        continue;
                    }
                }
                for b in data.chunks_mut(block) {
                    transform_strided(b, m, stride, plan);
                }
            }
        }
    }
}

fn transform_contiguous(data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
    #[cfg(feature = "parallel")]
    {
        let chunk = (plan.len() * TILE * 16).min(data.len());
        data.par_chunks_mut(chunk).for_each(|c| {
            let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(c, &mut scratch);
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
    }
}

fn transform_strided(block: &mut [C64], m: usize, stride: usize, plan: &Arc<dyn Fft<f64>>) {
    let tile = TILE.min(stride);
    let mut buf = vec![C64::new(0.0, 0.0); tile * m];
    let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut start = 0;
    while start < stride {
        let width = tile.min(stride - start);
        let lanes = &mut buf[..width * m];
        for t in 0..width {
            for j in 0..m {
                lanes[t * m + j] = block[j * stride + start + t];
            }
        }
        plan.process_with_scratch(lanes, &mut scratch);
        for t in 0..width {
            for j in 0..m {
                block[j * stride + start + t] = lanes[t * m + j];
            }
        }
        start += width;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(data: &[C64], m: usize, rank: usize) -> Vec<C64> {
        let n = data.len();
        let unravel = |mut f: usize| {
            let mut v = vec![0usize; rank];
            for a in (0..rank).rev() {
                v[a] = f % m;
                f /= m;
            }
            v
        };
        (0..n)
            .map(|kf| {
                let k = unravel(kf);
                data.iter()
                    .enumerate()
                    .map(|(jf, &x)| {
                        let j = unravel(jf);
                        let phase: f64 = k.iter().zip(&j).map(|(&a, &b)| (a * b) as f64).sum();
                        x * C64::from_polar(1.0, -2.0 * PI * phase / m as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_3d() {
        let m = 8;
        let data: Vec<C64> = (0..m * m * m)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        FftNd::new(m).forward(&mut fast, 3);
        let slow = naive_dft(&data, m, 3);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_normalized_round_trips() {
        let m = 16;
        let data: Vec<C64> = (0..m * m)
            .map(|i| C64::new(i as f64, -(i as f64).sqrt()))
            .collect();
        let mut work = data.clone();
        let fft = FftNd::new(m);
        fft.forward(&mut work, 2);
        fft.inverse_normalized(&mut work, 2);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
