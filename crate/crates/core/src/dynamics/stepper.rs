use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{measure_symbol, InterfaceField, MuskatOperator, RateField};

/// Length of the real-axis stability interval of classical RK4.
pub const RK4_REAL_STABILITY: f64 = 2.785_293_563_405_282;

/// Largest stable step for a symbol `-c |k|` resolved up to the grid corner
/// `|k| = pi sqrt(2) / dx`.
pub fn stability_bound(c: f64, dx: f64) -> f64 {
    RK4_REAL_STABILITY * dx / (c * std::f64::consts::PI * std::f64::consts::SQRT_2)
}

/// Symbol constant of `op`, measured on the lowest `x1` mode.
pub fn measured_strength(op: &MuskatOperator) -> Result<f64> {
    Ok(measure_symbol(op, [1, 0], 1e-3)?.constant)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// Largest per-point rate budget over the four stages.
    pub max_budget: f64,
    pub max_slope_ratio: f64,
}

/// Classical four-stage Runge-Kutta on the Muskat operator.
#[derive(Clone, Debug)]
pub struct Stepper {
    op: MuskatOperator,
    dt: f64,
    strength: f64,
    rhs_sign: f64,
    budget_cap: Option<f64>,
}

impl Stepper {
    /// Measures the operator strength `c` and takes `dt = dt_factor dx / c`.
    pub fn from_factor(op: MuskatOperator, dt_factor: f64) -> Result<Self> {
        let c = measured_strength(&op)?;
        let dt = dt_factor * op.grid().spacing() / c;
        Self::with_dt(op, dt, c)
    }

    pub fn with_dt(op: MuskatOperator, dt: f64, strength: f64) -> Result<Self> {
        let bound = stability_bound(strength, op.grid().spacing());
        if !(dt > 0.0 && dt <= bound) {
            return Err(Error::Stability { dt, bound });
        }
        Ok(Self {
            op,
            dt,
            strength,
            rhs_sign: 1.0,
            budget_cap: None,
        })
    }

    /// Fault-injection hook: `-1` integrates the time-reversed equation.
    pub fn with_rhs_sign(mut self, sign: f64) -> Self {
        self.rhs_sign = sign;
        self
    }

    pub fn with_budget_cap(mut self, cap: Option<f64>) -> Self {
        self.budget_cap = cap;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn stability_bound(&self) -> f64 {
        stability_bound(self.strength, self.op.grid().spacing())
    }

    pub fn operator(&self) -> &MuskatOperator {
        &self.op
    }

    pub fn rhs(&self, field: &InterfaceField) -> Result<RateField> {
        let mut out = self.op.evaluate(field, self.budget_cap)?;
        if self.rhs_sign != 1.0 {
            out.rates.iter_mut().for_each(|r| *r *= self.rhs_sign);
        }
        Ok(out)
    }

    fn stage(&self, base: &InterfaceField, k: &[f64], scale: f64) -> Result<InterfaceField> {
        let values = base.values.iter().zip(k).map(|(f, r)| f + scale * r).collect();
        InterfaceField::new(base.grid, values, base.time).map_err(|_| non_finite(base.time))
    }

    /// Advances `field` by one step of size `dt`. The new time is
    /// `(step_index + 1) dt`, so resumed runs land on identical times.
    pub fn step(&self, field: &InterfaceField, step_index: u64) -> Result<(InterfaceField, StepDiagnostics)> {
        let dt = self.dt;
        let k1 = self.rhs(field)?;
        let k2 = self.rhs(&self.stage(field, &k1.rates, 0.5 * dt)?)?;
        let k3 = self.rhs(&self.stage(field, &k2.rates, 0.5 * dt)?)?;
        let k4 = self.rhs(&self.stage(field, &k3.rates, dt)?)?;
        let values: Vec<f64> = (0..field.values.len())
            .map(|i| {
                let incr = k1.rates[i] + 2.0 * k2.rates[i] + 2.0 * k3.rates[i] + k4.rates[i];
                field.values[i] + dt / 6.0 * incr
            })
            .collect();
        let time = (step_index + 1) as f64 * dt;
        let next = InterfaceField::new(field.grid, values, time).map_err(|_| non_finite(time))?;
        let diag = StepDiagnostics {
            max_budget: [&k1, &k2, &k3, &k4].iter().map(|k| k.max_budget).fold(0.0, f64::max),
            max_slope_ratio: [&k1, &k2, &k3, &k4].iter().map(|k| k.max_slope_ratio).fold(0.0, f64::max),
        };
        Ok((next, diag))
    }
}

fn non_finite(t: f64) -> Error {
    Error::NonFinite(format!("field blew up during the step ending at t = {t}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{PeriodicGrid, QuadratureSpec};

    fn stepper(n: usize, period: f64) -> Stepper {
        let g = PeriodicGrid::new(period, n).unwrap();
        let op = MuskatOperator::new(g, QuadratureSpec::for_grid(&g)).unwrap();
        Stepper::from_factor(op, 0.25).unwrap()
    }

    #[test]
    fn constant_field_is_stationary() {
        let s = stepper(16, 8.0);
        let mut f = InterfaceField::constant(s.operator().grid(), 0.3).unwrap();
        for k in 0..5 {
            f = s.step(&f, k).unwrap().0;
        }
        assert!(f.values.iter().all(|&v| v == 0.3));
        assert_eq!(f.time, 5.0 * s.dt());
    }

    #[test]
    fn oversized_step_rejected() {
        let g = PeriodicGrid::new(8.0, 16).unwrap();
        let op = MuskatOperator::new(g, QuadratureSpec::for_grid(&g)).unwrap();
        let c = measured_strength(&op).unwrap();
        let bound = stability_bound(c, g.spacing());
        assert!(matches!(Stepper::with_dt(op, 1.01 * bound, c), Err(Error::Stability { .. })));
    }
}
