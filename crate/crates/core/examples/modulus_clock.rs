//! Prints the flattening clock for a few Lipschitz budgets and a slice of
//! the modulus at `L = 2`.

use muskat_lab::modulus::{FlatteningClock, Modulus};

fn main() -> muskat_lab::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>14} {:>14}", "L", "nu", "t1", "t2", "T*");
    for l in [1.0, 2.0, 5.0, 10.0] {
        let c = FlatteningClock::new(l)?;
        println!("{l:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}", c.nu, c.t1, c.t2, c.tstar);
    }

    let m = Modulus::new(2.0)?;
    println!("\nomega(t, r) at L = 2");
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "t", "r = 0", "r = 1", "r = 2", "r = 2/nu");
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = frac * m.clock.tstar;
        let row: Vec<String> = [0.0, 1.0, 2.0, m.saturation_radius()]
            .iter()
            .map(|&r| format!("{:>12.6}", m.omega(t, r).unwrap()))
            .collect();
        println!("{t:>10.2} {}", row.join(" "));
    }
    Ok(())
}
