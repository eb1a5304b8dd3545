use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::monitors::lipschitz_norm;
use crate::config::{InitialKind, RunConfig};
use crate::error::{domain, Result};
use crate::kernel::{InterfaceField, PeriodicGrid};
use crate::lemmas::CrossingProfile;
use crate::modulus::Modulus;

/// `offset + amplitude sin(2 pi (k1 x1 + k2 x2) / P)`.
pub fn mode_field(grid: PeriodicGrid, k: [f64; 2], amplitude: f64, offset: f64) -> Result<InterfaceField> {
    let base = 2.0 * std::f64::consts::PI / grid.period();
    InterfaceField::from_fn(grid, 0.0, |x| offset + amplitude * (base * (k[0] * x[0] + k[1] * x[1])).sin())
}

/// Random Fourier series over `0 < |k| <= band`, scaled so its discrete
/// Lipschitz norm equals `target`, then shrunk if needed to fit in `[0, 1]`
/// and centred there.
pub fn random_lipschitz_field(grid: PeriodicGrid, target: f64, band: f64, seed: u64) -> Result<InterfaceField> {
    if !(target > 0.0 && band >= 1.0) {
        return Err(domain(format!(
            "random-lipschitz needs lipschitz > 0 and band >= 1, got {target} and {band}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = band.floor() as i64;
    let mut terms = Vec::new();
    for k1 in 0..=kmax {
        for k2 in -kmax..=kmax {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            // one representative of each +-k pair
            if r == 0.0 || r > band || (k1 == 0 && k2 < 0) {
                continue;
            }
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            terms.push((k1 as f64, k2 as f64, a / r, b / r));
        }
    }
    let base = 2.0 * std::f64::consts::PI / grid.period();
    let raw = InterfaceField::from_fn(grid, 0.0, |x| {
        terms
            .iter()
            .map(|&(k1, k2, a, b)| {
                let phase = base * (k1 * x[0] + k2 * x[1]);
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })?;
    let lip = lipschitz_norm(&raw);
    let mut scale = target / lip;
    let osc = raw.oscillation() * scale;
    if osc > 1.0 {
        scale /= osc;
    }
    let mid = 0.5 * (raw.max() + raw.min());
    let values = raw.values.iter().map(|v| 0.5 + scale * (v - mid)).collect();
    InterfaceField::new(grid, values, 0.0)
}

/// The periodic crossing fixture for the clock at time `t`, with `x0` at
/// the grid centre, multiplied by `1 + overshoot` so its deficit at
/// `(x0, y0)` is strictly negative.
pub fn fixture_field(m: &Modulus, grid: PeriodicGrid, t: f64, xi: f64, overshoot: f64) -> Result<(CrossingProfile, InterfaceField)> {
    let j = m.j(t)?;
    let n = grid.n();
    let (profile, field) = CrossingProfile::sample_on_grid(m, j, xi, &grid, (n / 2, n / 2), t)?;
    let values = field.values.iter().map(|v| v * (1.0 + overshoot)).collect();
    Ok((profile, InterfaceField::new(grid, values, t)?))
}

/// Builds the initial field described by `config`.
///
/// | kind | params (defaults) |
/// |------|-------------------|
/// | `mode` | `k1` (1), `k2` (0), `amplitude` (0.1), `offset` (0.5) |
/// | `random-lipschitz` | `lipschitz` (L), `band` (4) |
/// | `fixture-crossing` | `xi` (1), `overshoot` (1e-6) |
pub fn initial_field(config: &RunConfig) -> Result<InterfaceField> {
    let grid = config.grid()?;
    match config.initial_kind {
        InitialKind::Mode => mode_field(
            grid,
            [config.param("k1", 1.0), config.param("k2", 0.0)],
            config.param("amplitude", 0.1),
            config.param("offset", 0.5),
        ),
        InitialKind::RandomLipschitz => random_lipschitz_field(
            grid,
            config.param("lipschitz", config.l),
            config.param("band", 4.0),
            config.seed,
        ),
        InitialKind::FixtureCrossing => {
            let m = Modulus::new(config.l)?;
            Ok(fixture_field(&m, grid, 0.0, config.param("xi", 1.0), config.param("overshoot", 1e-6))?.1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_field_meets_hypotheses() {
        for (period, seed) in [(20.0, 1u64), (128.0 * std::f64::consts::PI, 7)] {
            let g = PeriodicGrid::new(period, 32).unwrap();
            let f = random_lipschitz_field(g, 2.0, 4.0, seed).unwrap();
            assert!(f.min() >= 0.0 && f.max() <= 1.0);
            assert!(lipschitz_norm(&f) <= 2.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn random_field_is_seeded() {
        let g = PeriodicGrid::new(20.0, 16).unwrap();
        let a = random_lipschitz_field(g, 1.0, 3.0, 42).unwrap();
        assert_eq!(a, random_lipschitz_field(g, 1.0, 3.0, 42).unwrap());
        assert_ne!(a, random_lipschitz_field(g, 1.0, 3.0, 43).unwrap());
    }
}
