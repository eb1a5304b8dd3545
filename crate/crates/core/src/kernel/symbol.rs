//! Dispersion measurement: how fast a small Fourier mode decays under the
//! full nonlinear operator.

use serde::Serialize;

use super::grid::{InterfaceField, PeriodicGrid};
use super::rhs::MuskatOperator;
use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Decay of one mode `eps sin(2 pi k . x / P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolMeasurement {
    pub k: [i64; 2],
    /// Physical wavenumber `|2 pi k / P|`.
    pub wavenumber: f64,
    /// Measured decay rate per unit amplitude (positive for decay).
    pub rate: f64,
    /// `rate / wavenumber`.
    pub constant: f64,
    /// Norm of the rate field orthogonal to the mode, relative to the
    /// projected part.
    pub residual: f64,
}

/// Applies `op` to `eps sin(2 pi k . x / P)` and projects back on the mode.
pub fn measure_symbol(op: &MuskatOperator, k: [i64; 2], eps: f64) -> Result<SymbolMeasurement> {
    if k == [0, 0] {
        return Err(domain("the zero mode has no decay rate"));
    }
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(domain(format!("amplitude must lie in (0, 1e-3], got {eps}")));
    }
    let grid = op.grid();
    let base = 2.0 * std::f64::consts::PI / grid.period();
    let mode = |x: [f64; 2]| (base * (k[0] as f64 * x[0] + k[1] as f64 * x[1])).sin();
    let field = InterfaceField::from_fn(grid, 0.0, |x| eps * mode(x))?;
    let out = op.evaluate(&field, None)?;

    let phi: Vec<f64> = field.values.iter().map(|v| v / eps).collect();
    let norm2: f64 = phi.iter().map(|p| p * p).sum();
    let coeff = out.rates.iter().zip(&phi).map(|(r, p)| r * p).sum::<f64>() / norm2;
    let resid2: f64 = out
        .rates
        .iter()
        .zip(&phi)
        .map(|(r, p)| (r - coeff * p).powi(2))
        .sum();
    let residual = (resid2 / (coeff * coeff * norm2)).sqrt();
    if residual > 0.05 {
        return Err(Error::Configuration(format!(
            "projection residual {residual:.3e} exceeds 5% of the mode amplitude"
        )));
    }
    let wavenumber = base * ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
    let rate = -coeff / eps;
    Ok(SymbolMeasurement {
        k,
        wavenumber,
        rate,
        constant: rate / wavenumber,
        residual,
    })
}

/// Measures several modes on one operator.
pub fn dispersion_table(op: &MuskatOperator, modes: &[[i64; 2]], eps: f64) -> Result<Vec<SymbolMeasurement>> {
    modes.iter().map(|&k| measure_symbol(op, k, eps)).collect()
}

/// Least-squares slope through the origin of rate against wavenumber.
pub fn fitted_constant(table: &[SymbolMeasurement]) -> f64 {
    let num: f64 = table.iter().map(|m| m.rate * m.wavenumber).sum();
    let den: f64 = table.iter().map(|m| m.wavenumber * m.wavenumber).sum();
    num / den
}

/// `2 pi int_0^inf (1 - J0(u)) / u^2 du`, the constant `c` in the symbol
/// `-c |k|` of the linearised operator.
pub fn radial_kernel_constant() -> Result<f64> {
    let upper = 4000.0;
    let f = |u: f64| {
        if u < 1e-3 {
            0.25 - u * u / 64.0
        } else {
            (1.0 - libm::j0(u)) / (u * u)
        }
    };
    let body = integrate(f, 0.0, upper, &[], QuadOptions::absolute(1e-12))?.value;
    // int_U^inf (1 - J0)/u^2 = 1/U minus an O(U^{-5/2}) oscillatory term.
    Ok(2.0 * std::f64::consts::PI * (body + 1.0 / upper))
}

/// Convenience: a grid of side `period` with `n` points per axis and
/// default quadrature.
pub fn default_operator(n: usize, period: f64) -> Result<MuskatOperator> {
    let grid = PeriodicGrid::new(period, n)?;
    MuskatOperator::new(grid, super::quadrature::QuadratureSpec::for_grid(&grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_and_large_amplitude_rejected() {
        let op = default_operator(16, 6.0).unwrap();
        assert!(measure_symbol(&op, [0, 0], 1e-3).is_err());
        assert!(measure_symbol(&op, [1, 0], 1e-2).is_err());
    }

    #[test]
    fn kernel_constant_is_two_pi() {
        let c = radial_kernel_constant().unwrap();
        assert!((c / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-7);
    }
}
