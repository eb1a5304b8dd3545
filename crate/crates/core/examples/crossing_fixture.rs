//! Places a crossing fixture on the grid and shows the report the modulus
//! monitor produces, followed by the bound chain evaluated on grid data.

use muskat_lab::dynamics::{contradiction_chain, detect_crossing, fixture_field, modulus_monitor, MonitorSettings};
use muskat_lab::kernel::{MuskatOperator, PeriodicGrid, QuadratureSpec};
use muskat_lab::modulus::Modulus;

fn main() -> muskat_lab::Result<()> {
    let m = Modulus::new(2.0)?;
    let grid = PeriodicGrid::new(8.0, 64)?;
    let (_, field) = fixture_field(&m, grid, 0.0, 1.0, 1e-6)?;

    let check = modulus_monitor(&field, m.j(0.0)?, &m, &MonitorSettings::default());
    let Some(report) = detect_crossing(&field, &m, &check, 0) else {
        println!("no crossing found; min deficit {:.3e}", check.min_deficit);
        return Ok(());
    };
    println!("crossing at {:?} / {:?}, xi = {:.4}, deficit {:.3e}", report.x0, report.y0, report.xi, report.deficit);
    for c in [&report.increments_ordered, &report.upper_growth_x0, &report.lower_growth_y0] {
        println!("  {:<34} margin {:>11.3e}  holds {}", c.name, c.margin, c.holds);
    }
    let g = &report.gradient;
    println!(
        "  gradient match: angles {:.2} / {:.2} deg, magnitude ratios {:.3} / {:.3}",
        g.angle_x0_deg, g.angle_y0_deg, g.magnitude_ratio_x0, g.magnitude_ratio_y0
    );

    let mut spec = QuadratureSpec::for_grid(&grid);
    spec.outer_radius = 4.0;
    let rates = MuskatOperator::new(grid, spec)?.evaluate(&field, None)?;
    let verdict = contradiction_chain(&report, &field, &rates, &m)?;
    for link in &verdict.links {
        println!("  {:<32} {:>12.5e} <= {:>12.5e}  {}", link.name, link.left, link.right, link.holds);
    }
    println!("D < j'(t0): {}", verdict.contradiction);
    Ok(())
}
