use serde::{Deserialize, Serialize};

use super::grid::PeriodicGrid;
use super::interp::Interpolation;
use crate::error::{domain, Result};

/// How the far field `|h| > R` enters a rate evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// Add the linearised far field through its Fourier multiplier; only the
    /// nonlinear remainder goes to the error budget.
    Spectral,
    /// Drop the far field entirely and charge a bound for it to the budget.
    BudgetOnly,
}

impl std::str::FromStr for TailMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "budget-only" | "budget" => Ok(Self::BudgetOnly),
            other => Err(format!("unknown tail mode `{other}`")),
        }
    }
}

impl std::fmt::Display for TailMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Spectral => "spectral",
            Self::BudgetOnly => "budget-only",
        })
    }
}

/// Parameters of the polar discretisation of the singular integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rho0: f64,
    pub outer_radius: f64,
    pub rings: usize,
    pub sectors: usize,
    pub interpolation: Interpolation,
    pub tail: TailMode,
}

impl QuadratureSpec {
    /// Defaults scaled to the grid spacing.
    pub fn for_grid(grid: &PeriodicGrid) -> Self {
        let dx = grid.spacing();
        Self {
            rho0: dx / 100.0,
            outer_radius: (8.0 * dx).min(0.5 * grid.period()),
            rings: 24,
            sectors: 16,
            interpolation: Interpolation::Bicubic,
            tail: TailMode::Spectral,
        }
    }

    pub fn validate(&self, grid: &PeriodicGrid) -> Result<()> {
        let dx = grid.spacing();
        if !(self.rho0 > 0.0 && self.rho0 < dx) {
            return Err(domain(format!(
                "inner cutoff must satisfy 0 < rho0 < dx = {dx}, got {}",
                self.rho0
            )));
        }
        if !(self.outer_radius > dx && self.outer_radius <= 0.5 * grid.period() * (1.0 + 1e-12)) {
            return Err(domain(format!(
                "outer cutoff must satisfy dx < R <= P/2, got {}",
                self.outer_radius
            )));
        }
        if self.rings < 4 || self.sectors < 4 {
            return Err(domain("rings and sectors must both be >= 4"));
        }
        Ok(())
    }

    pub fn rule(&self) -> PolarRule {
        PolarRule::new(self.rho0, self.outer_radius, self.rings, self.sectors)
    }
}

/// Tensor polar rule on the annulus `rho0 <= |h| <= R`: midpoint in
/// `ln r`, midpoint in angle over `[0, pi)`. Each direction stands for the
/// pair `+h, -h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarRule {
    pub rho0: f64,
    pub outer_radius: f64,
    pub radii: Vec<f64>,
    /// Weight of ring `i` for `int f(h) dh`, including the Jacobian `r`
    /// and the angular step.
    pub weights: Vec<f64>,
    pub directions: Vec<[f64; 2]>,
    pub log_step: f64,
    pub angle_step: f64,
}

impl PolarRule {
    pub fn new(rho0: f64, outer_radius: f64, rings: usize, sectors: usize) -> Self {
        let log_step = (outer_radius / rho0).ln() / rings as f64;
        let angle_step = std::f64::consts::PI / sectors as f64;
        let radii: Vec<f64> = (0..rings)
            .map(|i| rho0 * ((i as f64 + 0.5) * log_step).exp())
            .collect();
        let weights = radii.iter().map(|r| r * r * log_step * angle_step).collect();
        let directions = (0..sectors)
            .map(|k| {
                let th = (k as f64 + 0.5) * angle_step;
                [th.cos(), th.sin()]
            })
            .collect();
        Self {
            rho0,
            outer_radius,
            radii,
            weights,
            directions,
            log_step,
            angle_step,
        }
    }

    pub fn node_count(&self) -> usize {
        self.radii.len() * self.directions.len()
    }

    /// Converts a first-ring weighted sum into the estimate `2 rho0 |F(r_0)|`
    /// of the skipped inner disk, where `F(r) = r * int f(r e) d theta`.
    pub fn inner_disk_estimate(&self, first_ring_sum: f64) -> f64 {
        let f0 = first_ring_sum / (self.radii[0] * self.log_step);
        2.0 * self.rho0 * f0.abs()
    }
}

/// Bound on the nonlinear remainder of the far field when its linear part
/// is handled spectrally.
pub fn spectral_tail_remainder(osc: f64, grad: f64, r: f64) -> f64 {
    use std::f64::consts::PI;
    PI * osc.powi(3) / r.powi(3) + 0.75 * PI * grad * osc * osc / (r * r)
}

/// Bound on the whole far field when it is dropped.
pub fn dropped_tail_bound(osc: f64, grad: f64, r: f64) -> f64 {
    use std::f64::consts::PI;
    2.0 * PI * osc / r + 0.75 * PI * grad * osc * osc / (r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_radial_power() {
        // int_{rho0 <= |h| <= R} |h|^{-1} dh = 2 pi (R - rho0); pairs double the half-plane sum.
        let rule = PolarRule::new(1e-3, 2.0, 400, 8);
        let s: f64 = rule
            .radii
            .iter()
            .zip(&rule.weights)
            .map(|(r, w)| 2.0 * w / r * rule.directions.len() as f64)
            .sum();
        let exact = 2.0 * std::f64::consts::PI * (2.0 - 1e-3);
        assert!((s / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn spec_validation() {
        let g = PeriodicGrid::new(1.0, 16).unwrap();
        let q = QuadratureSpec::for_grid(&g);
        q.validate(&g).unwrap();
        let bad = QuadratureSpec { rho0: 1.0, ..q };
        assert!(bad.validate(&g).is_err());
        let bad = QuadratureSpec { outer_radius: 0.9, ..q };
        assert!(bad.validate(&g).is_err());
        let bad = QuadratureSpec { rings: 2, ..q };
        assert!(bad.validate(&g).is_err());
    }
}
