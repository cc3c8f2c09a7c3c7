//! Zero-padded FFT convolution on a [`SpatialGrid`].

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::halfspace::{Point, SpatialGrid};

/// Linear convolution engine: grid data are zero-padded to `P >= 2N` points
/// per axis so circular convolution on the padded lattice equals the lattice
/// convolution restricted to the grid.
#[derive(Clone)]
pub struct Spectral {
    grid: SpatialGrid,
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).field("p", &self.p).finish()
    }
}

impl Spectral {
    pub fn new(grid: &SpatialGrid) -> Self {
        let p = (2 * grid.cells_per_axis()).next_power_of_two();
        let mut planner = FftPlanner::new();
        Spectral {
            grid: grid.clone(),
            p,
            forward: planner.plan_fft_forward(p),
            inverse: planner.plan_fft_inverse(p),
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn padded_len(&self) -> usize {
        self.p
    }

    /// Signed frequency (cycles per unit length) of padded index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let s = if k < self.p / 2 { k as f64 } else { k as f64 - self.p as f64 };
        s / (self.p as f64 * self.grid.spacing())
    }

    /// Signed lattice offset (in cells) of padded index `d`.
    fn offset(&self, d: usize) -> i64 {
        if d < self.p / 2 {
            d as i64
        } else {
            d as i64 - self.p as i64
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let p = self.p;
        if self.grid.dim() == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_mut(p) {
            plan.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); p];
        for c in 0..p {
            for r in 0..p {
                column[r] = data[r * p + c];
            }
            plan.process(&mut column);
            for r in 0..p {
                data[r * p + c] = column[r];
            }
        }
    }

    fn padded_size(&self) -> usize {
        self.p.pow(self.grid.dim() as u32)
    }

    /// Spectrum of the zero-padded samples.
    pub fn forward(&self, f: &[f64]) -> Result<Vec<Complex64>> {
        if f.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", f.len(), self.grid.len())));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); self.padded_size()];
        for (i, v) in f.iter().enumerate() {
            let (c, r) = self.grid.coords(i);
            data[r * self.p + c] = Complex64::new(*v, 0.0);
        }
        self.transform(&mut data, false);
        Ok(data)
    }

    /// `|ξ|` at every padded frequency index.
    pub fn radial_frequencies(&self) -> Vec<f64> {
        let p = self.p;
        (0..self.padded_size())
            .map(|k| {
                if self.grid.dim() == 1 {
                    self.frequency(k).abs()
                } else {
                    self.frequency(k % p).hypot(self.frequency(k / p))
                }
            })
            .collect()
    }

    /// Inverse transform of `spectrum * multiplier`, cropped to the grid.
    pub fn apply(&self, spectrum: &[Complex64], multiplier: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = spectrum.iter().zip(multiplier).map(|(s, m)| s * m).collect();
        self.crop_inverse(&mut data)
    }

    /// Inverse transform of `spectrum * kernel_spectrum`, cropped to the grid.
    pub fn apply_complex(&self, spectrum: &[Complex64], kernel: &[Complex64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = spectrum.iter().zip(kernel).map(|(s, m)| s * m).collect();
        self.crop_inverse(&mut data)
    }

    fn crop_inverse(&self, data: &mut [Complex64]) -> Vec<f64> {
        self.transform(data, true);
        let scale = 1.0 / self.padded_size() as f64;
        (0..self.grid.len())
            .map(|i| {
                let (c, r) = self.grid.coords(i);
                data[r * self.p + c].re * scale
            })
            .collect()
    }

    /// Spectrum of `h^n K(z)` sampled at every lattice offset of the padded grid.
    pub fn kernel_spectrum<K: Fn(&Point) -> f64>(&self, kernel: K) -> Vec<Complex64> {
        let h = self.grid.spacing();
        let w = self.grid.cell_measure();
        let p = self.p;
        let mut data: Vec<Complex64> = (0..self.padded_size())
            .map(|k| {
                let z = if self.grid.dim() == 1 {
                    [self.offset(k) as f64 * h, 0.0]
                } else {
                    [self.offset(k % p) as f64 * h, self.offset(k / p) as f64 * h]
                };
                Complex64::new(w * kernel(&z), 0.0)
            })
            .collect();
        self.transform(&mut data, false);
        data
    }

    /// Samples at the grid's cell centers of the function whose Fourier
    /// transform is the radial `multiplier(|ξ|)`, via the grid's own DFT.
    pub fn synthesize_radial<M: Fn(f64) -> f64>(&self, multiplier: M) -> Vec<f64> {
        let g = &self.grid;
        let n = g.cells_per_axis();
        let l = g.half_width();
        let h = g.spacing();
        let mut planner = FftPlanner::new();
        let plan = planner.plan_fft_inverse(n);
        let freq = |k: usize| {
            let s = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            s / (n as f64 * h)
        };
        let x0 = -l + 0.5 * h;
        let dxi = 1.0 / (n as f64 * h);
        let phase = |xi: f64| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * xi * x0);
        if g.dim() == 1 {
            let mut data: Vec<Complex64> = (0..n).map(|k| phase(freq(k)) * multiplier(freq(k).abs()) * dxi).collect();
            plan.process(&mut data);
            return data.iter().map(|c| c.re).collect();
        }
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (a, b) = (freq(k % n), freq(k / n));
                phase(a) * phase(b) * multiplier(a.hypot(b)) * dxi * dxi
            })
            .collect();
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            plan.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
        data.iter().map(|c| c.re).collect()
    }
}
