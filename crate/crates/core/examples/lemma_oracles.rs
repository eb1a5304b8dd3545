//! Runs each lemma oracle once at `L = 2` and prints the outcome.

use muskat_lab::lemmas::rearrangement::kiselev_integral_constant;
use muskat_lab::lemmas::{construct_crossing_profile, crossing_bound_chain, dissipation_bound, verify_monotonicity, PolarRoute};
use muskat_lab::modulus::Modulus;

fn main() -> muskat_lab::Result<()> {
    let l = 2.0;
    let m = Modulus::new(l)?;

    let mono = verify_monotonicity(l, 60)?;
    println!(
        "monotonicity: {} triples, min gap {:.2e}, quotient minimiser {:?}",
        mono.triples_checked, mono.min_gap, mono.argmin_quotient
    );

    let k = kiselev_integral_constant(1e-12)?;
    println!("small-xi constant: {:.12}", k.value);

    for xi in [0.1, 0.5, 1.0] {
        let d = dissipation_bound(&m, 0.0, xi)?;
        println!("dissipation at xi = {xi}: {:.4e} < {:.4e} is {}", d.value, d.bound, d.holds);
    }

    let t = m.clock.t1;
    let (profile, _) = construct_crossing_profile(&m, t, 1.0)?;
    let chain = crossing_bound_chain(&m, t, &profile, &PolarRoute::default())?;
    for link in &chain.planar_links {
        println!("{:<32} {:>12.5e} <= {:>12.5e}  {}", link.name, link.left, link.right, link.holds);
    }
    println!("contradiction at the crossing: {}", chain.contradiction);
    Ok(())
}
