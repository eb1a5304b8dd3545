use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{InterfaceField, Spectral2d};
use crate::modulus::Modulus;

/// Maximum centred-difference gradient magnitude.
pub fn lipschitz_norm(field: &InterfaceField) -> f64 {
    let g = field.grid;
    let n = g.n();
    let inv = 0.5 / g.spacing();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (up, down) = ((i + 1) % n, (i + n - 1) % n);
            (0..n).fold(0.0f64, |m, j| {
                let (r, l) = ((j + 1) % n, (j + n - 1) % n);
                let d1 = (field.at(up, j) - field.at(down, j)) * inv;
                let d2 = (field.at(i, r) - field.at(i, l)) * inv;
                m.max(d1.hypot(d2))
            })
        })
        .reduce(|| 0.0, f64::max)
}

/// Maximum spectral gradient magnitude on the grid.
pub fn lipschitz_norm_spectral(field: &InterfaceField) -> f64 {
    let (g1, g2) = Spectral2d::new(field.grid).gradient(&field.values);
    g1.iter().zip(&g2).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
}

/// How pairs are chosen by the modulus monitor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairScan {
    /// Every ordered pair with torus distance below the cap.
    Full,
    /// Full scan for `n <= 64`; otherwise offsets below the cap plus
    /// stratified random pairs.
    Auto,
}

impl std::str::FromStr for PairScan {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Self::Full),
            "auto" => Ok(Self::Auto),
            other => Err(format!("unknown pair scan `{other}`")),
        }
    }
}

impl std::fmt::Display for PairScan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSettings {
    pub scan: PairScan,
    /// Pairs farther apart than this are not scanned (on top of `2/nu`).
    pub radius_cap: f64,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            scan: PairScan::Auto,
            radius_cap: f64::INFINITY,
            random_pairs: 1_000_000,
            seed: 0,
        }
    }
}

/// Result of one modulus scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulusCheck {
    /// `min omega(t, |x-y|) - (f(x) - f(y))` over scanned pairs.
    pub min_deficit: f64,
    pub x: (usize, usize),
    pub y: (usize, usize),
    pub distance: f64,
    pub pairs_checked: u64,
    /// `j + 1 - osc f`, a lower bound for every pair at distance `>= 2/nu`.
    pub far_bound: f64,
}

/// Scans pairs of grid points for the smallest margin below the modulus.
pub fn modulus_monitor(field: &InterfaceField, j: f64, m: &Modulus, settings: &MonitorSettings) -> ModulusCheck {
    let g = field.grid;
    let n = g.n();
    let dx = g.spacing();
    let reach = settings.radius_cap.min(m.saturation_radius());
    let half = (n / 2) as isize;
    let mut offsets = Vec::new();
    for d1 in (1 - half)..=half {
        for d2 in (1 - half)..=half {
            let dist = dx * (d1 as f64).hypot(d2 as f64);
            if dist > 0.0 && dist < reach {
                offsets.push((d1, d2, dist));
            }
        }
    }

    let scan_offset = |&(d1, d2, dist): &(isize, isize, f64)| {
        let w = m.omega_with_j(j, dist);
        let mut best = (f64::INFINITY, (0, 0), (0, 0));
        for i in 0..n {
            let iy = (i as isize - d1).rem_euclid(n as isize) as usize;
            for jj in 0..n {
                let jy = (jj as isize - d2).rem_euclid(n as isize) as usize;
                let deficit = w - (field.at(i, jj) - field.at(iy, jy));
                if deficit < best.0 {
                    best = (deficit, (i, jj), (iy, jy));
                }
            }
        }
        (best, dist, (n * n) as u64)
    };
    let per_offset: Vec<_> = offsets.par_iter().map(scan_offset).collect();

    let mut result = ModulusCheck {
        min_deficit: f64::INFINITY,
        x: (0, 0),
        y: (0, 0),
        distance: 0.0,
        pairs_checked: 0,
        far_bound: j + 1.0 - field.oscillation(),
    };
    for ((d, x, y), dist, count) in per_offset {
        result.pairs_checked += count;
        if d < result.min_deficit {
            result.min_deficit = d;
            result.x = x;
            result.y = y;
            result.distance = dist;
        }
    }

    let sampled = settings.scan == PairScan::Auto && n > 64;
    if sampled {
        // Stratified over rows of x; pairs beyond the reach are still valid
        // samples because omega is evaluated at their true distance.
        let per_row = settings.random_pairs.div_ceil(n);
        let rows: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let mut best = (f64::INFINITY, (0, 0), (0, 0), 0.0);
                for _ in 0..per_row {
                    let jx = rng.gen_range(0..n);
                    let y = (rng.gen_range(0..n), rng.gen_range(0..n));
                    if y == (i, jx) {
                        continue;
                    }
                    let dist = g.torus_distance((i, jx), y);
                    let deficit = m.omega_with_j(j, dist) - (field.at(i, jx) - field.at(y.0, y.1));
                    if deficit < best.0 {
                        best = (deficit, (i, jx), y, dist);
                    }
                }
                (best, per_row as u64)
            })
            .collect();
        for ((d, x, y, dist), count) in rows {
            result.pairs_checked += count;
            if d < result.min_deficit {
                result.min_deficit = d;
                result.x = x;
                result.y = y;
                result.distance = dist;
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn lipschitz_of_constant_and_mode() {
        let g = PeriodicGrid::new(10.0, 128).unwrap();
        assert_eq!(lipschitz_norm(&InterfaceField::constant(g, 2.0).unwrap()), 0.0);
        let a = 0.01;
        let f = InterfaceField::from_fn(g, 0.0, |x| a * (2.0 * PI * x[0] / 10.0).sin()).unwrap();
        let exact = 2.0 * PI / 10.0 * a;
        assert!((lipschitz_norm(&f) / exact - 1.0).abs() < 5e-3);
        assert!((lipschitz_norm_spectral(&f) / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unit_range_field_is_below_initial_modulus() {
        let m = Modulus::new(2.0).unwrap();
        let g = PeriodicGrid::new(20.0, 16).unwrap();
        let f = InterfaceField::from_fn(g, 0.0, |x| 0.5 + 0.5 * (2.0 * PI * x[0] / 20.0).sin()).unwrap();
        let check = modulus_monitor(&f, 1.0, &m, &MonitorSettings::default());
        assert!(check.min_deficit >= 0.0);
        assert!(check.far_bound >= 0.0);
    }

    #[test]
    fn deficit_is_translation_invariant() {
        let m = Modulus::new(2.0).unwrap();
        let g = PeriodicGrid::new(16.0, 16).unwrap();
        let f = InterfaceField::from_fn(g, 0.0, |x| (x[0] * 0.4).sin() * (x[1] * 0.4).cos()).unwrap();
        let shifted = InterfaceField::from_fn(g, 0.0, |x| ((x[0] + 3.0) * 0.4).sin() * ((x[1] - 5.0) * 0.4).cos()).unwrap();
        let s = MonitorSettings::default();
        let a = modulus_monitor(&f, 0.5, &m, &s);
        let b = modulus_monitor(&shifted, 0.5, &m, &s);
        assert!((a.min_deficit - b.min_deficit).abs() < 1e-12);
    }
}
