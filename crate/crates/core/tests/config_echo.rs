use std::path::PathBuf;

use muskat_lab::config::InitialKind;
use muskat_lab::dynamics::PairScan;
use muskat_lab::kernel::{Interpolation, TailMode};
use muskat_lab::RunConfig;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = InitialKind> {
    prop_oneof![
        Just(InitialKind::Mode),
        Just(InitialKind::RandomLipschitz),
        Just(InitialKind::FixtureCrossing)
    ]
}

prop_compose! {
    fn configs()(
        log_n in 3u32..8,
        period in 1e-2f64..1e4,
        l in 1.0f64..100.0,
        dt_factor in 1e-3f64..1.0,
        horizon in 0.0f64..1e4,
        steps in proptest::option::of(1usize..100_000),
        checkpoint_every in 1usize..1000,
        seed in any::<u64>(),
        deterministic in any::<bool>(),
        dir in "[a-z][a-z0-9_/]{0,12}",
        rho0_frac in proptest::option::of(1e-4f64..0.99),
        outer_frac in proptest::option::of(0.01f64..1.0),
        rings in 4usize..64,
        sectors in 4usize..64,
        bicubic in any::<bool>(),
        spectral in any::<bool>(),
        cap in proptest::option::of(1e-12f64..1.0),
        full in any::<bool>(),
        radius_cap in prop_oneof![Just(f64::INFINITY), 0.1f64..1e3],
        pairs in 0usize..10_000_000,
        assert in any::<bool>(),
        snapshots in any::<bool>(),
        kind in kind(),
        params in proptest::collection::btree_map("[a-z][a-z0-9_]{0,6}", -1e6f64..1e6, 0..4),
    ) -> RunConfig {
        let mut c = RunConfig {
            n: 1 << log_n,
            period,
            l,
            dt_factor,
            horizon,
            steps,
            checkpoint_every,
            seed,
            deterministic,
            output_dir: PathBuf::from(dir),
            initial_kind: kind,
            initial_params: params,
            ..RunConfig::default()
        };
        let dx = period / c.n as f64;
        c.quadrature.rho0 = rho0_frac.map(|f| f * dx);
        c.quadrature.outer_radius = outer_frac.map(|f| dx + f * (0.5 * period - dx));
        c.quadrature.rings = rings;
        c.quadrature.sectors = sectors;
        c.quadrature.interpolation = if bicubic { Interpolation::Bicubic } else { Interpolation::Trigonometric };
        c.quadrature.tail = if spectral { TailMode::Spectral } else { TailMode::BudgetOnly };
        c.quadrature.budget_cap = cap;
        c.monitors.scan = if full { PairScan::Full } else { PairScan::Auto };
        c.monitors.radius_cap = radius_cap;
        c.monitors.random_pairs = pairs;
        c.monitors.assert = assert;
        c.monitors.snapshots = snapshots;
        c
    }
}

proptest! {
    #[test]
    fn echo_parses_back_to_the_same_config(c in configs()) {
        let text = c.to_text();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}

#[test]
fn sample_configs_are_valid() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["mode.conf", "random-lipschitz.conf", "fixture-crossing.conf"] {
        let c = RunConfig::from_file(&dir.join(name)).unwrap();
        c.validate().unwrap();
    }
}
