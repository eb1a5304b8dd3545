//! Synthetic fields that touch the modulus at a prescribed pair of points.
//!
//! The field is planar, `f(x) = G((x - c) . e)`, with
//! `G(s) = (j chi(s / delta) + Psi(2 s)) / 2`. Here `chi` is a cubic smooth
//! step and `Psi` is the odd extension of a concave profile `psi` that
//! agrees with the modulus profile at `r = xi`. The touching points are
//! `x0 = c + (xi/2) e` and `y0 = c - (xi/2) e`, where
//! `f(x0) - f(y0) = omega(t, xi)` holds exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::{HeightSampler, InterfaceField, PeriodicGrid};
use crate::modulus::Modulus;

fn smooth_step(u: f64) -> f64 {
    let u = u.clamp(-1.0, 1.0);
    0.5 * (3.0 * u - u * u * u)
}

fn smooth_step_slope(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        1.5 * (1.0 - u * u)
    }
}

/// Odd, `2P`-periodic map that is the identity on `[-a, a]`, bridges back
/// to 0 at `v = P` with a sine arc, and has slope of magnitude at most one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
struct Fold {
    a: f64,
    p: f64,
}

impl Fold {
    fn wrap(&self, v: f64) -> f64 {
        (v + self.p).rem_euclid(2.0 * self.p) - self.p
    }

    fn eval(&self, v: f64) -> (f64, f64) {
        let v = self.wrap(v);
        let (s, av) = (v.signum(), v.abs());
        let span = self.p - 2.0 * self.a;
        let (val, slope) = if av <= self.a {
            (av, 1.0)
        } else if av <= self.p - self.a {
            let arg = std::f64::consts::PI * (av - self.a) / span;
            (self.a + span / std::f64::consts::PI * arg.sin(), arg.cos())
        } else {
            (self.p - av, -1.0)
        };
        (s * val, slope)
    }
}

/// A planar field touching `omega(t, .)` at `x0`, `y0` with `|x0 - y0| = xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingProfile {
    pub l: f64,
    pub nu: f64,
    pub j: f64,
    pub xi: f64,
    /// Half-width of the clock step.
    pub delta: f64,
    pub center: [f64; 2],
    pub direction: [f64; 2],
    /// Period of the torus for the periodic variant (axis-aligned only).
    pub period: Option<f64>,
    fold: Option<Fold>,
}

impl CrossingProfile {
    /// Fixture at time `t`, centred at the origin, oriented along `e1`.
    pub fn new(m: &Modulus, t: f64, xi: f64) -> Result<Self> {
        Self::with_clock(m, m.j(t)?, xi)
    }

    pub fn with_clock(m: &Modulus, j: f64, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < m.saturation_radius()) {
            return Err(domain(format!(
                "xi must lie in (0, 2/nu) = (0, {}), got {xi}",
                m.saturation_radius()
            )));
        }
        if !(0.0..=1.0).contains(&j) {
            return Err(domain(format!("clock value must lie in [0, 1], got {j}")));
        }
        let delta = if m.l > m.nu {
            (0.5 * xi).min((0.75 * j / (m.l - m.nu)).max(0.25 * xi))
        } else {
            0.5 * xi
        };
        Ok(Self {
            l: m.l,
            nu: m.nu,
            j,
            xi,
            delta,
            center: [0.0, 0.0],
            direction: [1.0, 0.0],
            period: None,
            fold: None,
        })
    }

    /// Moves and rotates the fixture; `direction` is normalised.
    pub fn oriented(mut self, center: [f64; 2], direction: [f64; 2]) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if !(norm > 0.0) {
            return Err(domain("direction must be nonzero"));
        }
        if self.period.is_some() && direction[1] != 0.0 {
            return Err(domain("periodic fixtures are aligned with the first axis"));
        }
        self.center = center;
        self.direction = [direction[0] / norm, direction[1] / norm];
        Ok(self)
    }

    /// Periodic variant on a torus of side `period`, varying along `e1`.
    pub fn periodic(m: &Modulus, j: f64, xi: f64, period: f64) -> Result<Self> {
        let base = Self::with_clock(m, j, xi)?;
        if !(xi < 0.5 * period && 0.5 * (period - xi) >= base.delta) {
            return Err(domain(format!(
                "period {period} is too small for a fixture with xi = {xi}"
            )));
        }
        Ok(Self {
            period: Some(period),
            fold: Some(Fold { a: xi, p: period }),
            ..base
        })
    }

    pub fn x0(&self) -> [f64; 2] {
        let h = 0.5 * self.xi;
        [self.center[0] + h * self.direction[0], self.center[1] + h * self.direction[1]]
    }

    pub fn y0(&self) -> [f64; 2] {
        let h = 0.5 * self.xi;
        [self.center[0] - h * self.direction[0], self.center[1] - h * self.direction[1]]
    }

    /// The same field with the roles of `x0` and `y0` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            direction: [-self.direction[0], -self.direction[1]],
            ..*self
        }
    }

    fn psi(&self, r: f64) -> (f64, f64) {
        let nu = self.nu;
        if self.xi <= 2.0 {
            if r <= 2.0 {
                let c = 2.0 * std::f64::consts::SQRT_2;
                (nu * (r - r * r.sqrt() / c), nu * (1.0 - 1.5 * r.sqrt() / c))
            } else {
                let line = nu + 0.25 * nu * (r - 2.0);
                if line < 1.0 {
                    (line, 0.25 * nu)
                } else {
                    (1.0, 0.0)
                }
            }
        } else {
            let line = 0.5 * nu * r;
            if line < 1.0 {
                (line, 0.5 * nu)
            } else {
                (1.0, 0.0)
            }
        }
    }

    /// Radius at which `psi` reaches 1.
    fn psi_saturation(&self) -> f64 {
        if self.xi <= 2.0 {
            2.0 + 4.0 * (1.0 - self.nu) / self.nu
        } else {
            2.0 / self.nu
        }
    }

    /// Past `|s| >= S` the infinite profile is constant.
    pub fn saturation_half_width(&self) -> f64 {
        self.delta.max(0.5 * self.psi_saturation())
    }

    /// Points in `s` where `G` fails to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k = vec![0.0, self.delta, -self.delta];
        let half = 0.5 * self.psi_saturation();
        k.extend([half, -half]);
        if self.xi <= 2.0 {
            k.extend([1.0, -1.0]);
        }
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// `(G(s), G'(s))`.
    pub fn profile(&self, s: f64) -> (f64, f64) {
        match (self.period, self.fold) {
            (Some(p), Some(fold)) => {
                let s = (s + 0.5 * p).rem_euclid(p) - 0.5 * p;
                let sg = s.signum();
                let a = s.abs() / self.delta;
                let b = (0.5 * p - s.abs()) / self.delta;
                let (chi, dchi) = if smooth_step(a) <= smooth_step(b) {
                    (smooth_step(a), smooth_step_slope(a) / self.delta)
                } else {
                    (smooth_step(b), -smooth_step_slope(b) / self.delta)
                };
                let (tv, dt) = fold.eval(2.0 * s);
                let (ps, dps) = self.psi(tv.abs());
                let g = 0.5 * (self.j * sg * chi + tv.signum() * ps);
                let dg = 0.5 * (self.j * dchi + 2.0 * dps * dt);
                (g, dg)
            }
            _ => {
                let u = s / self.delta;
                let v = 2.0 * s;
                let (ps, dps) = self.psi(v.abs());
                let g = 0.5 * (self.j * smooth_step(u) + v.signum() * ps);
                let dg = 0.5 * (self.j * smooth_step_slope(u) / self.delta + 2.0 * dps);
                (g, dg)
            }
        }
    }

    pub fn coordinate(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.center[0]) * self.direction[0] + (x[1] - self.center[1]) * self.direction[1]
    }

    /// Upper bound on `|grad f|`.
    pub fn lipschitz_bound(&self) -> f64 {
        0.75 * self.j / self.delta + self.nu
    }

    /// Samples the periodic fixture so that `x0` lands on grid point `x0_index`.
    pub fn sample_on_grid(m: &Modulus, j: f64, xi: f64, grid: &PeriodicGrid, x0_index: (usize, usize), time: f64) -> Result<(Self, InterfaceField)> {
        let dx = grid.spacing();
        let steps = (xi / dx).round().max(1.0);
        let xi_grid = steps * dx;
        let fixture = Self::periodic(m, j, xi_grid, grid.period())?;
        let x0 = grid.point(x0_index.0, x0_index.1);
        let fixture = fixture.oriented([x0[0] - 0.5 * xi_grid, x0[1]], [1.0, 0.0])?;
        let field = InterfaceField::from_fn(*grid, time, |x| fixture.height(x))?;
        Ok((fixture, field))
    }

    /// Samples random pairs and reports the worst margin
    /// `omega(|x - y|) - (f(x) - f(y))`.
    pub fn verify(&self, m: &Modulus, pairs: usize, seed: u64) -> Result<FixtureCheck> {
        if (m.l - self.l).abs() > 0.0 {
            return Err(Error::Configuration("modulus does not match the fixture".into()));
        }
        let deficit = self.j + m.profile(self.xi) - (self.height(self.x0()) - self.height(self.y0()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reach = self.period.map_or(self.saturation_half_width() + self.xi, |p| 0.5 * p);
        let mut worst = f64::INFINITY;
        let mut worst_pair = (self.x0(), self.y0());
        for k in 0..pairs {
            // Half the pairs are collinear with the fixture axis, where the
            // margin is tightest.
            let (x, y) = if k % 2 == 0 {
                let s = rng.gen_range(-reach..reach);
                let d = rng.gen_range(-reach..reach);
                let e = self.direction;
                let c = self.center;
                ([c[0] + s * e[0], c[1] + s * e[1]], [c[0] + (s + d) * e[0], c[1] + (s + d) * e[1]])
            } else {
                let c = self.center;
                (
                    [c[0] + rng.gen_range(-reach..reach), c[1] + rng.gen_range(-reach..reach)],
                    [c[0] + rng.gen_range(-reach..reach), c[1] + rng.gen_range(-reach..reach)],
                )
            };
            let dist = match self.period {
                Some(p) => {
                    let w = |d: f64| d - p * (d / p).round();
                    w(x[0] - y[0]).hypot(w(x[1] - y[1]))
                }
                None => (x[0] - y[0]).hypot(x[1] - y[1]),
            };
            let margin = self.j + m.profile(dist) - (self.height(x) - self.height(y));
            if margin < worst {
                worst = margin;
                worst_pair = (x, y);
            }
        }
        let passed = worst >= -1e-12 && deficit.abs() <= 1e-12;
        if !passed {
            return Err(Error::Configuration(format!(
                "fixture violates the crossing assumptions: worst margin {worst:e}, deficit {deficit:e}"
            )));
        }
        Ok(FixtureCheck {
            pairs,
            crossing_deficit: deficit,
            worst_margin: worst,
            worst_pair,
            lipschitz_bound: self.lipschitz_bound(),
        })
    }
}

impl HeightSampler for CrossingProfile {
    fn height(&self, x: [f64; 2]) -> f64 {
        self.profile(self.coordinate(x)).0
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let g = self.profile(self.coordinate(x)).1;
        [g * self.direction[0], g * self.direction[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub pairs: usize,
    pub crossing_deficit: f64,
    pub worst_margin: f64,
    pub worst_pair: ([f64; 2], [f64; 2]),
    pub lipschitz_bound: f64,
}

/// Builds the infinite-plane fixture at `(t, xi)` and checks it.
pub fn construct_crossing_profile(m: &Modulus, t: f64, xi: f64) -> Result<(CrossingProfile, FixtureCheck)> {
    let p = CrossingProfile::new(m, t, xi)?;
    let check = p.verify(m, 10_000, 0x5eed)?;
    Ok((p, check))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touches_exactly() {
        let m = Modulus::new(2.0).unwrap();
        for xi in [0.25, 1.0, 1.5, 2.0, 5.0, 20.0] {
            let t = m.clock.t1;
            let (p, check) = construct_crossing_profile(&m, t, xi).unwrap();
            let gap = p.height(p.x0()) - p.height(p.y0());
            assert_eq!(gap, m.omega(t, xi).unwrap());
            assert!(check.worst_margin >= -1e-12);
        }
    }

    #[test]
    fn swap_negates() {
        let m = Modulus::new(2.0).unwrap();
        let p = CrossingProfile::new(&m, 0.0, 1.0).unwrap();
        let q = p.swapped();
        for x in [[0.3, 0.1], [-2.0, 5.0], [7.0, -1.0]] {
            assert_eq!(q.height(x), -p.height(x));
        }
        assert_eq!(q.x0(), p.y0());
    }

    #[test]
    fn gradients_match_modulus_slope() {
        let m = Modulus::new(2.0).unwrap();
        let p = CrossingProfile::new(&m, m.clock.t1, 1.0)
            .unwrap()
            .oriented([0.4, -0.2], [1.0, 1.0])
            .unwrap();
        let slope = m.profile_slope(1.0).left;
        for x in [p.x0(), p.y0()] {
            let g = p.gradient(x);
            assert!((g[0] - slope * p.direction[0]).abs() < 1e-15);
            assert!((g[1] - slope * p.direction[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_variant_is_periodic_and_touches() {
        let m = Modulus::new(2.0).unwrap();
        let p = CrossingProfile::periodic(&m, 0.2, 1.0, 40.0).unwrap();
        for s in [-13.0, 0.2, 7.5, 19.9] {
            assert!((p.height([s, 0.0]) - p.height([s + 40.0, 3.0])).abs() < 1e-12);
        }
        let check = p.verify(&m, 20_000, 3).unwrap();
        assert!(check.crossing_deficit.abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        let m = Modulus::new(2.0).unwrap();
        assert!(CrossingProfile::new(&m, 0.0, 0.0).is_err());
        assert!(CrossingProfile::new(&m, 0.0, m.saturation_radius()).is_err());
        assert!(CrossingProfile::periodic(&m, 0.5, 1.0, 1.5).is_err());
    }
}
