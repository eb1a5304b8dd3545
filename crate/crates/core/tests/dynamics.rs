use std::f64::consts::PI;

use muskat_lab::config::InitialKind;
use muskat_lab::dynamics::crossing::clock_rate_fd;
use muskat_lab::dynamics::{
    fixture_field, lipschitz_norm, lipschitz_norm_spectral, measured_strength, mode_field, sup_norm_monitor,
    RunStatus, Simulation, Stepper,
};
use muskat_lab::kernel::{InterfaceField, MuskatOperator, PeriodicGrid, QuadratureSpec};
use muskat_lab::modulus::Modulus;
use muskat_lab::RunConfig;

fn small_config(n: usize, period: f64, steps: usize) -> RunConfig {
    RunConfig {
        n,
        period,
        steps: Some(steps),
        checkpoint_every: 1,
        ..RunConfig::default()
    }
}

fn operator(n: usize, period: f64) -> MuskatOperator {
    let g = PeriodicGrid::new(period, n).unwrap();
    MuskatOperator::new(g, QuadratureSpec::for_grid(&g)).unwrap()
}

/// Amplitude of the `sin(2 pi x1 / P)` component.
fn sine_amplitude(f: &InterfaceField) -> f64 {
    let n = f.grid.n();
    let mut acc = 0.0;
    for i in 0..n {
        let s = (2.0 * PI * i as f64 / n as f64).sin();
        for j in 0..n {
            acc += (f.at(i, j) - 0.5) * s;
        }
    }
    2.0 * acc / (n * n) as f64
}

#[test]
fn small_mode_decays_like_the_half_laplacian() {
    let (n, period) = (32, 16.0);
    let op = operator(n, period);
    let stepper = Stepper::from_factor(op, 0.25).unwrap();
    let mut f = mode_field(stepper.operator().grid(), [1.0, 0.0], 1e-3, 0.5).unwrap();
    let a0 = sine_amplitude(&f);
    let steps = 40;
    for k in 0..steps {
        f = stepper.step(&f, k).unwrap().0;
    }
    let xi = 2.0 * PI / period;
    let expected = (-2.0 * PI * xi * f.time).exp();
    let observed = sine_amplitude(&f) / a0;
    assert!((observed / expected - 1.0).abs() < 0.02, "{observed} vs {expected}");
}

#[test]
fn rk4_converges_at_high_order() {
    let (n, period) = (16, 8.0);
    let op = operator(n, period);
    let c = measured_strength(&op).unwrap();
    let dt0 = 0.4 * op.grid().spacing() / c;
    let f0 = mode_field(op.grid(), [1.0, 1.0], 0.3, 0.5).unwrap();
    let solve = |refine: u64| {
        let s = Stepper::with_dt(op.clone(), dt0 / refine as f64, c).unwrap();
        let mut f = f0.clone();
        for k in 0..8 * refine {
            f = s.step(&f, k).unwrap().0;
        }
        f
    };
    let (a, b, d) = (solve(1), solve(2), solve(4));
    let diff = |x: &InterfaceField, y: &InterfaceField| {
        x.values.iter().zip(&y.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    };
    let order = (diff(&a, &b) / diff(&b, &d)).log2();
    assert!(order >= 3.0, "observed order {order}");
}

#[test]
fn reversed_time_trips_the_sup_norm_monitor() {
    let mut config = small_config(16, 8.0, 20);
    config.initial_params.insert("amplitude".into(), 0.3);
    let mut sim = Simulation::new(&config).unwrap().with_rhs_sign(-1.0);
    let status = sim.run(|_, _| Ok(())).unwrap();
    assert!(!sup_norm_monitor(&sim.state().monitors));
    assert_ne!(status, RunStatus::Clean);

    let mut forward = Simulation::new(&config).unwrap();
    assert_eq!(forward.run(|_, _| Ok(())).unwrap(), RunStatus::Clean);
    assert!(sup_norm_monitor(&forward.state().monitors));
}

#[test]
fn fixture_inserted_mid_run_is_reported() {
    let mut config = small_config(64, 8.0, 10);
    config.quadrature.outer_radius = Some(4.0);
    let mut sim = Simulation::new(&config).unwrap();
    for _ in 0..3 {
        sim.advance().unwrap();
    }
    let t = sim.state().field.time;
    let m = Modulus::new(config.l).unwrap();
    let (_, fixture) = fixture_field(&m, config.grid().unwrap(), t, 1.0, 1e-6).unwrap();
    sim.replace_values(fixture.values).unwrap();
    let cp = sim.checkpoint().unwrap();
    let report = cp.crossing.expect("crossing must be reported");
    assert_eq!(report.step, 3);
    assert_eq!(report.t0, t);
    assert!(report.deficit < 0.0);
    assert!(report.side_conditions_hold(), "{report:#?}");
    let summary = sim.summary();
    assert_eq!(summary.exit_code, 3);
    assert!(summary.chain.is_some());
}

#[test]
fn fixture_beyond_saturation_rejected() {
    let m = Modulus::new(2.0).unwrap();
    let g = PeriodicGrid::new(8.0, 32).unwrap();
    assert!(fixture_field(&m, g, 0.0, m.saturation_radius(), 1e-6).is_err());
    assert!(fixture_field(&m, g, 0.0, 2.5 / m.nu, 1e-6).is_err());
}

#[test]
fn clock_rate_finite_difference_matches_closed_form() {
    let m = Modulus::new(2.0).unwrap();
    let c = m.clock;
    // Power-of-two steps keep t +- h exact near t = 2.5e3.
    let (coarse, fine) = (2f64.powi(-4), 2f64.powi(-17));
    let cases = [
        (50.0, coarse),
        (0.5 * c.t1, coarse),
        (0.5 * (c.t1 + c.t2), coarse),
        (c.t2 + 0.01, fine),
        (c.t2 + 0.03, fine),
    ];
    for (t, h) in cases {
        let exact = c.rate(t).unwrap();
        let fd = clock_rate_fd(&m, t, h).unwrap();
        assert!((fd - exact).abs() <= 1e-10 * exact.abs(), "t = {t}: {fd} vs {exact}");
    }
}

#[test]
fn centred_and_spectral_lipschitz_agree_on_smooth_data() {
    let g = PeriodicGrid::new(128.0 * PI, 64).unwrap();
    let f = mode_field(g, [1.0, 1.0], 40.0, 0.5).unwrap();
    let (a, b) = (lipschitz_norm(&f), lipschitz_norm_spectral(&f));
    assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
}

#[test]
fn random_initial_data_within_hypotheses() {
    let mut config = small_config(32, 128.0 * PI, 1);
    config.initial_kind = InitialKind::RandomLipschitz;
    for seed in 0..4 {
        config.seed = seed;
        let f = muskat_lab::dynamics::initial_field(&config).unwrap();
        assert!(f.min() >= 0.0 && f.max() <= 1.0);
        assert!(lipschitz_norm(&f) <= config.l);
    }
}
