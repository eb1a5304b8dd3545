//! Off-grid sampling of periodic fields.

use serde::{Deserialize, Serialize};

use super::grid::{InterfaceField, PeriodicGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Separable Catmull-Rom cubic convolution (Keys, a = -1/2).
    Bicubic,
    /// Exact band-limited interpolation through the FFT.
    Trigonometric,
}

impl std::str::FromStr for Interpolation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bicubic" => Ok(Self::Bicubic),
            "trigonometric" | "trig" => Ok(Self::Trigonometric),
            other => Err(format!("unknown interpolation `{other}`")),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bicubic => "bicubic",
            Self::Trigonometric => "trigonometric",
        })
    }
}

/// Catmull-Rom weights for the samples at offsets -1, 0, 1, 2 and
/// fractional position `t` in `[0, 1)`.
pub fn cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Precomputed integer offset and weights for a fixed displacement `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BicubicStencil {
    pub offset: [isize; 2],
    pub w1: [f64; 4],
    pub w2: [f64; 4],
}

impl BicubicStencil {
    pub fn new(grid: &PeriodicGrid, h: [f64; 2]) -> Self {
        let s1 = h[0] / grid.spacing();
        let s2 = h[1] / grid.spacing();
        let (f1, f2) = (s1.floor(), s2.floor());
        Self {
            offset: [f1 as isize, f2 as isize],
            w1: cubic_weights(s1 - f1),
            w2: cubic_weights(s2 - f2),
        }
    }

    /// Interpolated value of `values` at grid point `(i, j)` displaced by `h`.
    pub fn sample(&self, grid: &PeriodicGrid, values: &[f64], i: usize, j: usize) -> f64 {
        let n = grid.n() as isize;
        let mut acc = 0.0;
        for (a, wa) in self.w1.iter().enumerate() {
            let row = (i as isize + self.offset[0] + a as isize - 1).rem_euclid(n) as usize;
            let base = row * grid.n();
            let mut inner = 0.0;
            for (b, wb) in self.w2.iter().enumerate() {
                let col = (j as isize + self.offset[1] + b as isize - 1).rem_euclid(n) as usize;
                inner += wb * values[base + col];
            }
            acc += wa * inner;
        }
        acc
    }

    /// Whole-field shift `out(x) = f(x + h)`; `scratch` holds the row pass.
    pub fn shift_into(&self, grid: &PeriodicGrid, values: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let n = grid.n();
        let ni = n as isize;
        let start = (self.offset[1] - 1).rem_euclid(ni) as usize;
        let mut ext = vec![0.0; n + 3];
        for i in 0..n {
            let row = &values[i * n..(i + 1) * n];
            for (m, e) in ext.iter_mut().enumerate() {
                *e = row[(start + m) % n];
            }
            let dst = &mut scratch[i * n..(i + 1) * n];
            let w = self.w2;
            for (j, d) in dst.iter_mut().enumerate() {
                *d = w[0] * ext[j] + w[1] * ext[j + 1] + w[2] * ext[j + 2] + w[3] * ext[j + 3];
            }
        }
        for i in 0..n {
            let dst = &mut out[i * n..(i + 1) * n];
            let rows: [usize; 4] = std::array::from_fn(|a| {
                (i as isize + self.offset[0] + a as isize - 1).rem_euclid(ni) as usize * n
            });
            let w = self.w1;
            for (j, d) in dst.iter_mut().enumerate() {
                *d = w[0] * scratch[rows[0] + j]
                    + w[1] * scratch[rows[1] + j]
                    + w[2] * scratch[rows[2] + j]
                    + w[3] * scratch[rows[3] + j];
            }
        }
    }
}

/// Bicubic value of a grid field at an arbitrary point.
pub fn bicubic_at(field: &InterfaceField, x: [f64; 2]) -> f64 {
    BicubicStencil::new(&field.grid, x).sample(&field.grid, &field.values, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity_and_interpolate() {
        for t in [0.0, 0.1, 0.5, 0.9] {
            let w = cubic_weights(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            // reproduces linear functions exactly
            let lin: f64 = w.iter().enumerate().map(|(k, w)| w * (k as f64 - 1.0)).sum();
            assert!((lin - t).abs() < 1e-15);
        }
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn shift_matches_pointwise_sample() {
        let g = PeriodicGrid::new(2.0, 16).unwrap();
        let f = InterfaceField::from_fn(g, 0.0, |x| (std::f64::consts::PI * x[0]).sin() * x[1].cos()).unwrap();
        let st = BicubicStencil::new(&g, [0.31, -0.77]);
        let mut scratch = vec![0.0; g.len()];
        let mut out = vec![0.0; g.len()];
        st.shift_into(&g, &f.values, &mut scratch, &mut out);
        for (i, j) in [(0, 0), (3, 15), (15, 7)] {
            assert!((out[g.index(i, j)] - st.sample(&g, &f.values, i, j)).abs() < 1e-15);
        }
    }

    #[test]
    fn integer_shift_is_exact() {
        let g = PeriodicGrid::new(8.0, 8).unwrap();
        let f = InterfaceField::from_fn(g, 0.0, |x| x[0] * 10.0 + x[1]).unwrap();
        let st = BicubicStencil::new(&g, [2.0, -1.0]);
        assert_eq!(st.sample(&g, &f.values, 1, 1), f.at(3, 0));
    }
}
