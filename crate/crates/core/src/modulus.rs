//! The flattening modulus of continuity and its clock.
//!
//! For a Lipschitz budget `L >= 1` the modulus is
//!
//! ```text
//! omega(t, r) = j(t) + nu (r - r^{3/2} / 2^{3/2})   0 <= r <= 2
//!             = j(t) + (nu / 2) r                  2 <= r <= 2 / nu
//!             = j(t) + 1                           r >= 2 / nu
//! ```
//!
//! with `nu = L / (3 (L^2 + 1)^{3/2})`. The clock `j` starts at 1 and decays
//! through three phases (exponential, affine, two-thirds power law) until it
//! reaches zero at the extinction time `T*`, after which the modulus is the pure
//! `nu`-Lipschitz profile.

use serde::Serialize;

use crate::error::{domain, Result};

/// A Lipschitz slope bound `L >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct LipschitzBudget(f64);

impl LipschitzBudget {
    pub fn new(l: f64) -> Result<Self> {
        if !l.is_finite() || l < 1.0 {
            return Err(domain(format!("Lipschitz budget must be a finite L >= 1, got {l}")));
        }
        Ok(Self(l))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `nu(L) = L / (3 (L^2 + 1)^{3/2})`.
pub fn nu_of(l: f64) -> Result<f64> {
    let l = LipschitzBudget::new(l)?.get();
    Ok(nu_unchecked(l))
}

fn nu_unchecked(l: f64) -> f64 {
    let s = l * l + 1.0;
    l / (3.0 * s * s.sqrt())
}

/// Extinction time of the flattening clock.
pub fn tstar_of(l: f64) -> Result<f64> {
    Ok(FlatteningClock::new(l)?.tstar())
}

/// Phase of the flattening clock at a given time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockPhase {
    /// `j' = -(nu^2 / L) j` while `j > nu / 2`.
    Exponential,
    /// `j' = -nu^3 / (2L)` while `nu^4 / 8 < j <= nu / 2`.
    Affine,
    /// `j' = -(nu^{5/3} / L) j^{1/3}` while `0 < j <= nu^4 / 8`.
    PowerLaw,
    Extinct,
}

/// Closed-form solution of the piecewise clock ODE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatteningClock {
    pub l: f64,
    pub nu: f64,
    /// End of the exponential phase, where `j = nu / 2`.
    pub t1: f64,
    /// End of the affine phase, where `j = nu^4 / 8`.
    pub t2: f64,
    pub tstar: f64,
}

impl FlatteningClock {
    pub fn new(l: f64) -> Result<Self> {
        let l = LipschitzBudget::new(l)?.get();
        let nu = nu_unchecked(l);
        let t1 = l * (2.0 / nu).ln() / (nu * nu);
        let affine = (nu / 2.0 - nu.powi(4) / 8.0) * 2.0 * l / nu.powi(3);
        let t2 = t1 + affine;
        let tstar = t2 + 0.375 * nu * l;
        Ok(Self { l, nu, t1, t2, tstar })
    }

    pub fn tstar(&self) -> f64 {
        self.tstar
    }

    pub fn phase(&self, t: f64) -> ClockPhase {
        if t < self.t1 {
            ClockPhase::Exponential
        } else if t < self.t2 {
            ClockPhase::Affine
        } else if t < self.tstar {
            ClockPhase::PowerLaw
        } else {
            ClockPhase::Extinct
        }
    }

    /// `j(t)`.
    pub fn j(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.j_unchecked(t))
    }

    fn j_unchecked(&self, t: f64) -> f64 {
        let (l, nu) = (self.l, self.nu);
        match self.phase(t) {
            ClockPhase::Exponential => (-nu * nu * t / l).exp(),
            ClockPhase::Affine => nu / 2.0 - nu.powi(3) / (2.0 * l) * (t - self.t1),
            ClockPhase::PowerLaw => {
                // j^{2/3} decays affinely from (nu^4/8)^{2/3} = nu^{8/3}/4.
                let base = nu.powf(8.0 / 3.0) / 4.0;
                let rate = 2.0 * nu.powf(5.0 / 3.0) / (3.0 * l);
                let s = (base - rate * (t - self.t2)).max(0.0);
                s * s.sqrt()
            }
            ClockPhase::Extinct => 0.0,
        }
    }

    /// `j'(t)` from the closed form of each phase.
    pub fn rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let (l, nu) = (self.l, self.nu);
        let j = self.j_unchecked(t);
        Ok(match self.phase(t) {
            ClockPhase::Exponential => -nu * nu / l * j,
            ClockPhase::Affine => -nu.powi(3) / (2.0 * l),
            ClockPhase::PowerLaw => -nu.powf(5.0 / 3.0) / l * j.cbrt(),
            ClockPhase::Extinct => 0.0,
        })
    }

    /// Right-hand side of the defining ODE, as a function of the state `j`.
    pub fn ode_rhs(&self, j: f64) -> f64 {
        let (l, nu) = (self.l, self.nu);
        let j = j.max(0.0);
        if j > nu / 2.0 {
            -nu * nu / l * j
        } else if j > nu.powi(4) / 8.0 {
            -nu.powi(3) / (2.0 * l)
        } else {
            -nu.powf(5.0 / 3.0) / l * j.cbrt()
        }
    }

    /// `-min{ (nu^2/L) j + nu^3/(2L), (nu^{5/3}/L) j^{1/3} }`, the decay the
    /// clock is allowed to outpace.
    pub fn decay_floor(&self, j: f64) -> f64 {
        let (l, nu) = (self.l, self.nu);
        let a = nu * nu / l * j + nu.powi(3) / (2.0 * l);
        let b = nu.powf(5.0 / 3.0) / l * j.max(0.0).cbrt();
        -a.min(b)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// One-sided radial slopes of the modulus. Away from the knots `r = 2` and
/// `r = 2/nu` both sides agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialSlope {
    pub left: f64,
    pub right: f64,
}

impl RadialSlope {
    pub fn is_smooth(&self) -> bool {
        self.left == self.right
    }

    /// The one-sided value of largest magnitude.
    pub fn max_abs(&self) -> f64 {
        if self.left.abs() >= self.right.abs() {
            self.left
        } else {
            self.right
        }
    }
}

/// The modulus `omega(t, r)` for a fixed Lipschitz budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Modulus {
    pub l: f64,
    pub nu: f64,
    pub clock: FlatteningClock,
}

impl Modulus {
    pub fn new(l: f64) -> Result<Self> {
        let clock = FlatteningClock::new(l)?;
        Ok(Self {
            l: clock.l,
            nu: clock.nu,
            clock,
        })
    }

    /// Radius past which the profile saturates at 1.
    pub fn saturation_radius(&self) -> f64 {
        2.0 / self.nu
    }

    /// The time-independent part of the modulus (the modulus at `j = 0`).
    pub fn profile(&self, r: f64) -> f64 {
        let nu = self.nu;
        if r <= 2.0 {
            nu * (r - r * r.sqrt() / (2.0 * std::f64::consts::SQRT_2))
        } else if r <= 2.0 / nu {
            0.5 * nu * r
        } else {
            1.0
        }
    }

    pub fn profile_slope(&self, r: f64) -> RadialSlope {
        let nu = self.nu;
        let inner = |r: f64| nu * (1.0 - 1.5 * r.sqrt() / (2.0 * std::f64::consts::SQRT_2));
        let sat = 2.0 / nu;
        let (left, right) = if r < 2.0 {
            (inner(r), inner(r))
        } else if r == 2.0 {
            (inner(2.0), 0.5 * nu)
        } else if r < sat {
            (0.5 * nu, 0.5 * nu)
        } else if r == sat {
            (0.5 * nu, 0.0)
        } else {
            (0.0, 0.0)
        };
        RadialSlope { left, right }
    }

    /// Second radial derivative of the profile; `None` at the knots.
    pub fn profile_curvature(&self, r: f64) -> Option<f64> {
        if r <= 0.0 || r == 2.0 || r == 2.0 / self.nu {
            return None;
        }
        if r < 2.0 {
            Some(-0.75 * self.nu / (2.0 * std::f64::consts::SQRT_2 * r.sqrt()))
        } else {
            Some(0.0)
        }
    }

    /// `omega(t, r)`.
    pub fn omega(&self, t: f64, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(domain(format!("radius must be >= 0, got {r}")));
        }
        Ok(self.clock.j(t)? + self.profile(r))
    }

    /// `omega` with a precomputed clock value, for hot loops.
    pub fn omega_with_j(&self, j: f64, r: f64) -> f64 {
        j + self.profile(r)
    }

    /// One-sided radial slopes of `omega(t, .)` at `r > 0`.
    pub fn omega_slope(&self, t: f64, r: f64) -> Result<RadialSlope> {
        check_time(t)?;
        if r.is_nan() || r <= 0.0 {
            return Err(domain(format!(
                "radial slope is only defined for r > 0, got {r}"
            )));
        }
        Ok(self.profile_slope(r))
    }

    pub fn j(&self, t: f64) -> Result<f64> {
        self.clock.j(t)
    }
}

/// Free-function form of [`Modulus::omega`].
pub fn omega_of(m: &Modulus, t: f64, r: f64) -> Result<f64> {
    m.omega(t, r)
}

/// Free-function form of [`FlatteningClock::j`].
pub fn j_of(clock: &FlatteningClock, t: f64) -> Result<f64> {
    clock.j(t)
}

/// Free-function form of [`Modulus::omega_slope`].
pub fn omega_slope(m: &Modulus, t: f64, r: f64) -> Result<RadialSlope> {
    m.omega_slope(t, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nu_known_values() {
        let nu1 = nu_of(1.0).unwrap();
        assert!((nu1 - 1.0 / (3.0 * 2f64.powf(1.5))).abs() < 1e-16);
        assert!((nu1 - 0.117_851_130_197_757_92).abs() < 1e-15);
        let nu2 = nu_of(2.0).unwrap();
        assert!((nu2 - 0.059_628_479_399_994_39).abs() < 1e-15);
    }

    #[test]
    fn nu_leading_order_asymptotics() {
        let l = 1e4;
        assert!((nu_of(l).unwrap() * 3.0 * l * l - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_small_budget() {
        assert!(nu_of(0.999).is_err());
        assert!(tstar_of(0.5).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
    }

    #[test]
    fn clock_endpoints_and_phase_boundaries() {
        let c = FlatteningClock::new(2.0).unwrap();
        assert_eq!(c.j(0.0).unwrap(), 1.0);
        assert_eq!(c.j(c.tstar).unwrap(), 0.0);
        assert_eq!(c.j(10.0 * c.tstar).unwrap(), 0.0);
        let nu = c.nu;
        assert!((c.j(c.t1).unwrap() - nu / 2.0).abs() < 1e-15);
        // both sides of t1 agree
        let left = (-nu * nu * c.t1 / c.l).exp();
        assert!((left - nu / 2.0).abs() < 1e-14);
        assert!((c.j(c.t2).unwrap() - nu.powi(4) / 8.0).abs() < 1e-18);
        assert!(c.j(-1.0).is_err());
    }

    #[test]
    fn tstar_at_two() {
        // High-precision evaluation of the closed form gives 2538.44755811193...
        let t = tstar_of(2.0).unwrap();
        assert!((t - 2_538.447_558_111_934).abs() / t < 1e-12);
    }

    #[test]
    fn omega_branch_continuity() {
        let m = Modulus::new(2.0).unwrap();
        let t = 100.0;
        let j = m.j(t).unwrap();
        assert_eq!(m.omega(t, 0.0).unwrap(), j);
        let below = j + m.nu * (2.0 - 2f64.powf(1.5) / 2f64.powf(1.5));
        assert!((m.omega(t, 2.0).unwrap() - below).abs() < 1e-16);
        assert!((m.omega(t, 2.0).unwrap() - (j + m.nu)).abs() < 1e-16);
        let sat = 2.0 / m.nu;
        assert!((m.omega(t, sat).unwrap() - (j + 1.0)).abs() < 1e-15);
        assert!(m.omega(t, -1e-3).is_err());
    }

    #[test]
    fn slopes_at_knots() {
        let m = Modulus::new(2.0).unwrap();
        let nu = m.nu;
        let s = m.omega_slope(0.0, 2.0).unwrap();
        assert!((s.left - nu / 4.0).abs() < 1e-17);
        assert!((s.right - nu / 2.0).abs() < 1e-17);
        assert_eq!(s.max_abs(), s.right);
        assert!((m.omega_slope(0.0, 1e-18).unwrap().left - nu).abs() < 1e-8);
        assert_eq!(m.omega_slope(0.0, 10.0).unwrap().left, nu / 2.0);
        assert!(m.omega_slope(0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn nu_bounds(l in 1.0f64..1e6) {
            let nu = nu_of(l).unwrap();
            prop_assert!(nu > 0.0);
            prop_assert!(nu < 5f64.powf(-0.5));
        }

        #[test]
        fn omega_monotone_in_r(l in 1.0f64..50.0, t in 0.0f64..1e4, r in 0.0f64..5e3, dr in 0.0f64..10.0) {
            let m = Modulus::new(l).unwrap();
            prop_assert!(m.omega(t, r + dr).unwrap() >= m.omega(t, r).unwrap());
        }

        #[test]
        fn omega_nonincreasing_in_t(l in 1.0f64..20.0, t in 0.0f64..1e7, dt in 0.0f64..1e5, r in 0.0f64..100.0) {
            let m = Modulus::new(l).unwrap();
            prop_assert!(m.omega(t + dt, r).unwrap() <= m.omega(t, r).unwrap());
        }

        #[test]
        fn slope_bounded_by_nu(l in 1.0f64..50.0, r in 1e-9f64..1e4) {
            let m = Modulus::new(l).unwrap();
            let s = m.omega_slope(0.0, r).unwrap();
            prop_assert!(s.left >= 0.0 && s.left <= m.nu);
            prop_assert!(s.right >= 0.0 && s.right <= m.nu);
        }
    }
}
