use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Uniform `n x n` sampling of a square torus of side `period`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    period: f64,
    n: usize,
    spacing: f64,
}

impl PeriodicGrid {
    pub fn new(period: f64, n: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(domain(format!("period must be finite and positive, got {period}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(domain(format!("samples per axis must be a power of two >= 8, got {n}")));
        }
        Ok(Self {
            period,
            n,
            spacing: period / n as f64,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        i * self.n + j
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.spacing, j as f64 * self.spacing]
    }

    /// Shortest signed index offset along one axis, in `(-n/2, n/2]`.
    pub fn wrap_offset(&self, d: isize) -> isize {
        let n = self.n as isize;
        let mut d = d.rem_euclid(n);
        if d > n / 2 {
            d -= n;
        }
        d
    }

    /// Torus-aware Euclidean distance between two grid points.
    pub fn torus_distance(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        let d1 = self.wrap_offset(a.0 as isize - b.0 as isize) as f64;
        let d2 = self.wrap_offset(a.1 as isize - b.1 as isize) as f64;
        self.spacing * d1.hypot(d2)
    }

    /// Signed frequency index of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> isize {
        let n = self.n as isize;
        let k = k as isize;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Physical wavenumber `2 pi m / P` of FFT bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency(k) as f64 / self.period
    }
}

/// Heights of the interface sampled on a periodic grid at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceField {
    pub grid: PeriodicGrid,
    /// Row-major: `values[i * n + j]` sits at `x = (i dx, j dx)`.
    pub values: Vec<f64>,
    pub time: f64,
}

impl InterfaceField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Self { grid, values, time };
        field.check_finite()?;
        Ok(field)
    }

    pub fn from_fn(grid: PeriodicGrid, time: f64, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let n = grid.n();
        let values = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(grid.point(i, j)))
            .collect();
        Self::new(grid, values, time)
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()], 0.0)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite(format!(
                "field sample {p} is {}",
                self.values[p]
            ))),
            None => Ok(()),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    /// Discrete L2 norm `sqrt(sum f^2 dx^2)`.
    pub fn l2_norm(&self) -> f64 {
        let dx = self.grid.spacing();
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt() * dx
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(PeriodicGrid::new(1.0, 4).is_err());
        assert!(PeriodicGrid::new(1.0, 24).is_err());
        assert!(PeriodicGrid::new(0.0, 16).is_err());
        let g = PeriodicGrid::new(3.0, 16).unwrap();
        assert_eq!(g.spacing() * 16.0, 3.0);
    }

    #[test]
    fn torus_distance_wraps() {
        let g = PeriodicGrid::new(16.0, 16).unwrap();
        assert_eq!(g.torus_distance((0, 0), (15, 0)), 1.0);
        assert_eq!(g.torus_distance((1, 2), (4, 6)), 5.0);
        assert_eq!(g.torus_distance((0, 0), (8, 8)), 8.0 * 2f64.sqrt());
    }

    #[test]
    fn frequencies() {
        let g = PeriodicGrid::new(1.0, 8).unwrap();
        let f: Vec<isize> = (0..8).map(|k| g.frequency(k)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn rejects_non_finite() {
        let g = PeriodicGrid::new(1.0, 8).unwrap();
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert!(matches!(InterfaceField::new(g, v, 0.0), Err(Error::NonFinite(_))));
    }
}
