//! A short in-memory simulation of a single Fourier mode with the monitors
//! printed at every checkpoint.

use muskat_lab::dynamics::Simulation;
use muskat_lab::RunConfig;

fn main() -> muskat_lab::Result<()> {
    let mut config = RunConfig {
        n: 32,
        period: 16.0,
        steps: Some(40),
        checkpoint_every: 5,
        ..RunConfig::default()
    };
    config.initial_params.insert("amplitude".into(), 0.3);
    config.initial_params.insert("k2".into(), 1.0);

    let mut sim = Simulation::new(&config)?;
    println!("dt = {:.4e}, measured strength {:.6}", sim.stepper().dt(), sim.stepper().strength());
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "sup", "l2", "lipschitz", "deficit");
    let status = sim.run(|cp, _| {
        let r = &cp.record;
        println!(
            "{:>8.4} {:>12.8} {:>12.8} {:>12.8} {:>12.6}",
            r.t, r.sup_norm, r.l2_norm, r.lipschitz, r.min_deficit
        );
        Ok(())
    })?;
    println!("status {status:?}");
    Ok(())
}
