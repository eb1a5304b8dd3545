//! Two-dimensional FFT helpers on the periodic grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{InterfaceField, PeriodicGrid};

/// Forward/inverse 2D transforms for one grid size.
#[derive(Clone)]
pub struct Spectral2d {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral2d").field("grid", &self.grid).finish()
    }
}

impl Spectral2d {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        Self {
            grid,
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        plan.process(data);
        transpose(data, n);
        plan.process(data);
        transpose(data, n);
    }

    /// Unnormalised forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Inverse transform (normalised), keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Applies a Fourier multiplier given as a function of the physical
    /// wavevector `(k1, k2)`.
    pub fn apply<F>(&self, values: &[f64], multiplier: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let n = self.grid.n();
        let mut spec = self.forward(values);
        for a in 0..n {
            let k1 = self.grid.wavenumber(a);
            for b in 0..n {
                spec[a * n + b] *= multiplier(k1, self.grid.wavenumber(b));
            }
        }
        self.inverse_real(spec)
    }

    /// Spectral gradient; the Nyquist bin is dropped so the result is real.
    pub fn gradient(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n();
        let spec = self.forward(values);
        let mut d1 = spec.clone();
        let mut d2 = spec;
        for a in 0..n {
            let k1 = if a == n / 2 { 0.0 } else { self.grid.wavenumber(a) };
            for b in 0..n {
                let k2 = if b == n / 2 { 0.0 } else { self.grid.wavenumber(b) };
                let i = a * n + b;
                d1[i] *= Complex64::new(0.0, k1);
                d2[i] *= Complex64::new(0.0, k2);
            }
        }
        (self.inverse_real(d1), self.inverse_real(d2))
    }

    /// Periodic shift `x -> f(x + h)` by exact trigonometric interpolation.
    pub fn shift(&self, spectrum: &[Complex64], h: [f64; 2]) -> Vec<f64> {
        let n = self.grid.n();
        let phase1: Vec<Complex64> = (0..n)
            .map(|a| Complex64::from_polar(1.0, self.grid.wavenumber(a) * h[0]))
            .collect();
        let phase2: Vec<Complex64> = (0..n)
            .map(|b| Complex64::from_polar(1.0, self.grid.wavenumber(b) * h[1]))
            .collect();
        let mut shifted = spectrum.to_vec();
        for a in 0..n {
            for b in 0..n {
                shifted[a * n + b] *= phase1[a] * phase2[b];
            }
        }
        self.inverse_real(shifted)
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// `-(-Delta)^{1/2} f` through the multiplier `-|k|`.
pub fn halflap_rhs(field: &InterfaceField) -> Vec<f64> {
    let spectral = Spectral2d::new(field.grid);
    spectral.apply(&field.values, |k1, k2| Complex64::new(-k1.hypot(k2), 0.0))
}

/// Evaluates the trigonometric interpolant of a grid field at arbitrary points.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    grid: PeriodicGrid,
    spectrum: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(field: &InterfaceField) -> Self {
        let spectral = Spectral2d::new(field.grid);
        let scale = 1.0 / field.grid.len() as f64;
        let spectrum = spectral
            .forward(&field.values)
            .into_iter()
            .map(|c| c * scale)
            .collect();
        Self {
            grid: field.grid,
            spectrum,
        }
    }

    fn phases(&self, x: f64) -> Vec<Complex64> {
        (0..self.grid.n())
            .map(|a| Complex64::from_polar(1.0, self.grid.wavenumber(a) * x))
            .collect()
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let n = self.grid.n();
        let p1 = self.phases(x[0]);
        let p2 = self.phases(x[1]);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            let row: Complex64 = (0..n).map(|b| self.spectrum[a * n + b] * p2[b]).sum();
            acc += row * p1[a];
        }
        acc.re
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let n = self.grid.n();
        let p1 = self.phases(x[0]);
        let p2 = self.phases(x[1]);
        let (mut g1, mut g2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for a in 0..n {
            let k1 = if a == n / 2 { 0.0 } else { self.grid.wavenumber(a) };
            for b in 0..n {
                let k2 = if b == n / 2 { 0.0 } else { self.grid.wavenumber(b) };
                let term = self.spectrum[a * n + b] * p1[a] * p2[b];
                g1 += term * Complex64::new(0.0, k1);
                g2 += term * Complex64::new(0.0, k2);
            }
        }
        [g1.re, g2.re]
    }
}
