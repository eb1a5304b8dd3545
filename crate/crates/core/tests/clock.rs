mod support;

use muskat_lab::modulus::{nu_of, tstar_of, ClockPhase, FlatteningClock, Modulus};
use proptest::prelude::*;
use support::{clock_rhs, dopri45, frozen, rel_err};

#[test]
fn closed_forms_match_frozen_values() {
    assert!(rel_err(nu_of(2.0).unwrap(), frozen::NU_2) < 1e-15);
    let c = FlatteningClock::new(2.0).unwrap();
    assert!(rel_err(c.t1, frozen::T1_2) < 1e-13);
    assert!(rel_err(c.t2, frozen::T2_2) < 1e-13);
    assert!(rel_err(c.tstar, frozen::TSTAR_2) < 1e-13);
    assert!(rel_err(tstar_of(5.0).unwrap(), frozen::TSTAR_5) < 1e-13);
    for (l, t) in frozen::TSTAR_POWERS_OF_TWO {
        assert!(rel_err(tstar_of(l).unwrap(), t) < 1e-12, "L = {l}");
    }
}

#[test]
fn closed_form_tracks_adaptive_integration() {
    for l in [2.0, 5.0] {
        let c = FlatteningClock::new(l).unwrap();
        let times: Vec<f64> = (1..=500).map(|i| c.tstar * i as f64 / 500.0).collect();
        let ode = dopri45(|_, j| clock_rhs(l, j), 0.0, 1.0, &times, 1e-12, 1e-14);
        let worst = times
            .iter()
            .zip(&ode)
            .map(|(&t, &y)| (c.j(t).unwrap() - y.max(0.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "L = {l}: {worst:e}");
    }
}

#[test]
fn phases_in_order() {
    let c = FlatteningClock::new(3.0).unwrap();
    assert_eq!(c.phase(0.0), ClockPhase::Exponential);
    assert_eq!(c.phase(0.5 * (c.t1 + c.t2)), ClockPhase::Affine);
    assert_eq!(c.phase(0.5 * (c.t2 + c.tstar)), ClockPhase::PowerLaw);
    assert_eq!(c.phase(c.tstar), ClockPhase::Extinct);
}

#[test]
fn profile_is_concave_only_below_two() {
    // The slope jumps up from nu/4 to nu/2 at r = 2.
    let m = Modulus::new(2.0).unwrap();
    let s = m.profile_slope(2.0);
    assert!(s.right > s.left);
    for r in [0.1, 0.5, 1.0, 1.9] {
        assert!(m.profile_curvature(r).unwrap() < 0.0);
    }
}

proptest! {
    #[test]
    fn rate_respects_decay_floor(l in 1.0f64..20.0, u in 0.0f64..1.0) {
        let c = FlatteningClock::new(l).unwrap();
        let t = u * c.tstar * 0.999_999;
        let j = c.j(t).unwrap();
        prop_assert!(c.rate(t).unwrap() >= c.decay_floor(j) - 1e-6 * c.decay_floor(j).abs());
    }

    #[test]
    fn rate_is_the_ode_rhs(l in 1.0f64..20.0, u in 0.0f64..1.0) {
        let c = FlatteningClock::new(l).unwrap();
        let t = u * c.tstar;
        let j = c.j(t).unwrap();
        let expected = clock_rhs(l, j);
        prop_assert!((c.rate(t).unwrap() - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
    }

    #[test]
    fn profile_is_subadditive(l in 1.0f64..20.0, a in 0.0f64..200.0, b in 0.0f64..200.0) {
        let m = Modulus::new(l).unwrap();
        prop_assert!(m.profile(a + b) <= m.profile(a) + m.profile(b) + 1e-15);
    }
}
