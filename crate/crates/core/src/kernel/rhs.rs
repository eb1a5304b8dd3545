//! Grid evaluation of the Muskat right-hand side
//! `int (delta_h f - grad f . h) / ((delta_h f)^2 + |h|^2)^{3/2} dh`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::grid::{InterfaceField, PeriodicGrid};
use super::interp::{BicubicStencil, Interpolation};
use super::quadrature::{dropped_tail_bound, spectral_tail_remainder, PolarRule, QuadratureSpec, TailMode};
use super::spectral::Spectral2d;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Rates at every grid point with the accompanying error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct RateField {
    pub rates: Vec<f64>,
    /// Per-point budget: inner disk estimate plus far-field bound.
    pub budget: Vec<f64>,
    pub max_budget: f64,
    pub max_inner: f64,
    pub max_tail: f64,
    /// Largest `|delta_h f| / |h|` met at any quadrature node.
    pub max_slope_ratio: f64,
}

/// A Muskat operator bound to one grid and quadrature, with every
/// node-dependent table precomputed.
#[derive(Clone, Debug)]
pub struct MuskatOperator {
    grid: PeriodicGrid,
    spec: QuadratureSpec,
    rule: PolarRule,
    spectral: Spectral2d,
    stencils: Vec<(BicubicStencil, BicubicStencil)>,
    far_multiplier: Option<Vec<f64>>,
}

impl MuskatOperator {
    pub fn new(grid: PeriodicGrid, spec: QuadratureSpec) -> Result<Self> {
        spec.validate(&grid)?;
        let rule = spec.rule();
        let mut stencils = Vec::with_capacity(rule.node_count());
        for &r in &rule.radii {
            for d in &rule.directions {
                let h = [r * d[0], r * d[1]];
                stencils.push((
                    BicubicStencil::new(&grid, h),
                    BicubicStencil::new(&grid, [-h[0], -h[1]]),
                ));
            }
        }
        let far_multiplier = match spec.tail {
            TailMode::Spectral => Some(far_field_multiplier(&grid, spec.outer_radius)?),
            TailMode::BudgetOnly => None,
        };
        Ok(Self {
            grid,
            spec,
            rule,
            spectral: Spectral2d::new(grid),
            stencils,
            far_multiplier,
        })
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    pub fn rule(&self) -> &PolarRule {
        &self.rule
    }

    pub fn spectral(&self) -> &Spectral2d {
        &self.spectral
    }

    /// Evaluates the rate array; fails if the largest per-point budget
    /// exceeds `cap`.
    pub fn evaluate(&self, field: &InterfaceField, cap: Option<f64>) -> Result<RateField> {
        if field.grid != self.grid {
            return Err(Error::Domain("field grid does not match operator grid".into()));
        }
        field.check_finite()?;
        let n = self.grid.n();
        let len = self.grid.len();
        // The operator only sees differences, so a reference level can be
        // removed; constant fields then give exactly zero.
        let reference = field.values[0];
        let shifted_values: Vec<f64> = field.values.iter().map(|v| v - reference).collect();
        let f = &shifted_values;
        let (g1, g2) = self.spectral.gradient(f);
        let spectrum = match self.spec.interpolation {
            Interpolation::Trigonometric => Some(self.spectral.forward(f)),
            Interpolation::Bicubic => None,
        };

        let mut acc = vec![0.0; len];
        let mut first_ring = vec![0.0; len];
        let mut plus = vec![0.0; len];
        let mut minus = vec![0.0; len];
        let mut scratch = vec![0.0; len];
        let mut max_ratio: f64 = 0.0;
        let sectors = self.rule.directions.len();

        for (node, (sp, sm)) in self.stencils.iter().enumerate() {
            let ring = node / sectors;
            let r = self.rule.radii[ring];
            let w = self.rule.weights[ring];
            let d = self.rule.directions[node % sectors];
            let h = [r * d[0], r * d[1]];
            match &spectrum {
                Some(spec) => {
                    plus = self.spectral.shift(spec, h);
                    minus = self.spectral.shift(spec, [-h[0], -h[1]]);
                }
                None => {
                    sp.shift_into(&self.grid, f, &mut scratch, &mut plus);
                    sm.shift_into(&self.grid, f, &mut scratch, &mut minus);
                }
            }
            let r2 = r * r;
            let node_max = acc
                .par_chunks_mut(n)
                .zip(first_ring.par_chunks_mut(n))
                .enumerate()
                .map(|(i, (acc_row, first_row))| {
                    let mut local: f64 = 0.0;
                    for j in 0..n {
                        let p = i * n + j;
                        let dp = plus[p] - f[p];
                        let dm = minus[p] - f[p];
                        let gh = g1[p] * h[0] + g2[p] * h[1];
                        let qp = dp * dp + r2;
                        let qm = dm * dm + r2;
                        let ip = (dp - gh) / (qp * qp.sqrt());
                        let im = (dm + gh) / (qm * qm.sqrt());
                        let contrib = w * (ip + im);
                        acc_row[j] += contrib;
                        if ring == 0 {
                            first_row[j] += contrib;
                        }
                        local = local.max(dp.abs().max(dm.abs()));
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            max_ratio = max_ratio.max(node_max / r);
        }

        if let Some(mult) = &self.far_multiplier {
            let mut spec = self.spectral.forward(f);
            for (c, m) in spec.iter_mut().zip(mult) {
                *c *= Complex64::new(*m, 0.0);
            }
            let far = self.spectral.inverse_real(spec);
            for (a, b) in acc.iter_mut().zip(&far) {
                *a += b;
            }
        }

        let osc = field.oscillation();
        let big_r = self.spec.outer_radius;
        let mut budget = vec![0.0; len];
        let (mut max_budget, mut max_inner, mut max_tail) = (0.0f64, 0.0f64, 0.0f64);
        for p in 0..len {
            let grad = g1[p].hypot(g2[p]);
            let inner = self.rule.inner_disk_estimate(first_ring[p]);
            let tail = match self.spec.tail {
                TailMode::Spectral => spectral_tail_remainder(osc, grad, big_r),
                TailMode::BudgetOnly => dropped_tail_bound(osc, grad, big_r),
            };
            budget[p] = inner + tail;
            max_budget = max_budget.max(budget[p]);
            max_inner = max_inner.max(inner);
            max_tail = max_tail.max(tail);
        }
        if let Some(v) = acc.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("rate evaluation produced {v}")));
        }
        if let Some(cap) = cap {
            if max_budget > cap {
                return Err(Error::Budget {
                    budget: max_budget,
                    cap,
                });
            }
        }
        Ok(RateField {
            rates: acc,
            budget,
            max_budget,
            max_inner,
            max_tail,
            max_slope_ratio: max_ratio,
        })
    }
}

/// One-shot evaluation of the Muskat right-hand side.
pub fn muskat_rhs(field: &InterfaceField, spec: &QuadratureSpec) -> Result<RateField> {
    MuskatOperator::new(field.grid, *spec)?.evaluate(field, None)
}

/// `I(a) = int_0^a (1 - J0(u)) / u^2 du`, tending to 1 as `a -> inf`.
fn bessel_kernel_integrand(u: f64) -> f64 {
    if u < 1e-3 {
        0.25 - u * u / 64.0
    } else {
        (1.0 - libm::j0(u)) / (u * u)
    }
}

/// Fourier multiplier of the linear far field
/// `int_{|h|>R} (f(x+h) - f(x)) / |h|^3 dh`, namely `2 pi |k| (I(|k| R) - 1)`.
pub fn far_field_multiplier(grid: &PeriodicGrid, outer_radius: f64) -> Result<Vec<f64>> {
    let n = grid.n();
    let base = 2.0 * std::f64::consts::PI / grid.period();
    let mut keys: Vec<i64> = Vec::new();
    let key = |a: usize, b: usize| {
        let (m1, m2) = (grid.frequency(a) as i64, grid.frequency(b) as i64);
        m1 * m1 + m2 * m2
    };
    for a in 0..n {
        for b in 0..n {
            keys.push(key(a, b));
        }
    }
    let mut distinct = keys.clone();
    distinct.sort_unstable();
    distinct.dedup();

    // Cumulative integration between consecutive arguments.
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 0.0,
        max_intervals: 2000,
    };
    let mut table = std::collections::HashMap::with_capacity(distinct.len());
    let (mut prev_a, mut running) = (0.0, 0.0);
    for &k2 in &distinct {
        let kappa = base * (k2 as f64).sqrt();
        let a = kappa * outer_radius;
        running += integrate(bessel_kernel_integrand, prev_a, a, &[], opts)?.value;
        prev_a = a;
        let m = if k2 == 0 {
            0.0
        } else {
            2.0 * std::f64::consts::PI * kappa * (running - 1.0)
        };
        table.insert(k2, m);
    }
    Ok(keys.iter().map(|k| table[k]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bessel_kernel_integral_tends_to_one() {
        let opts = QuadOptions::absolute(1e-12);
        let v = integrate(bessel_kernel_integrand, 0.0, 2000.0, &[], opts).unwrap().value;
        // Remaining tail is 1/2000 up to an O(a^{-5/2}) oscillatory term.
        assert!((v + 1.0 / 2000.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_field_has_zero_rate_and_budget() {
        let g = PeriodicGrid::new(4.0, 16).unwrap();
        let f = InterfaceField::constant(g, 0.3).unwrap();
        let out = muskat_rhs(&f, &QuadratureSpec::for_grid(&g)).unwrap();
        assert!(out.rates.iter().all(|v| *v == 0.0));
        assert_eq!(out.max_budget, 0.0);
    }

    #[test]
    fn small_mode_decays_at_linear_rate() {
        let g = PeriodicGrid::new(2.0 * PI, 32).unwrap();
        let eps = 1e-3;
        let f = InterfaceField::from_fn(g, 0.0, |x| eps * (2.0 * x[0]).sin()).unwrap();
        let out = muskat_rhs(&f, &QuadratureSpec::for_grid(&g)).unwrap();
        let p = g.index(4, 3);
        let expected = -2.0 * PI * 2.0 * f.values[p];
        assert!((out.rates[p] / expected - 1.0).abs() < 0.02, "{} vs {expected}", out.rates[p]);
    }

    #[test]
    fn budget_cap_is_enforced() {
        let g = PeriodicGrid::new(2.0 * PI, 16).unwrap();
        let f = InterfaceField::from_fn(g, 0.0, |x| x[0].sin()).unwrap();
        let op = MuskatOperator::new(g, QuadratureSpec::for_grid(&g)).unwrap();
        assert!(matches!(op.evaluate(&f, Some(0.0)), Err(Error::Budget { .. })));
    }
}
