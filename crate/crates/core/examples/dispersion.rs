//! Measures the decay rate of small Fourier modes under the discrete
//! operator and compares the fitted constant with the kernel constant.

use muskat_lab::kernel::{dispersion_table, fitted_constant, radial_kernel_constant, MuskatOperator, PeriodicGrid, QuadratureSpec};

fn main() -> muskat_lab::Result<()> {
    let grid = PeriodicGrid::new(2.0 * std::f64::consts::PI, 64)?;
    let op = MuskatOperator::new(grid, QuadratureSpec::for_grid(&grid))?;
    let table = dispersion_table(&op, &[[1, 0], [0, 2], [2, 2], [4, 0]], 1e-3)?;
    println!("{:>8} {:>10} {:>12} {:>10}", "k", "|k|", "rate", "rate/|k|");
    for s in &table {
        println!("{:>8} {:>10.4} {:>12.6} {:>10.6}", format!("{:?}", s.k), s.wavenumber, s.rate, s.constant);
    }
    println!("fitted {:.6}, kernel {:.6}", fitted_constant(&table), radial_kernel_constant()?);
    Ok(())
}
