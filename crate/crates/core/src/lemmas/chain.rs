//! The chain of bounds evaluated at a crossing configuration:
//!
//! ```text
//! D  = d_t f(x0) - d_t f(y0)
//!    <= B1 = (nu/L) int (delta_h f(x0) - delta_h f(y0)) / |h|^3 dh
//!    <= B2 = (nu/L) (near + far rearrangement integrals of omega)
//!    <  B3 = -min{ (nu^2/L) j + nu^3/(2L), (nu^{5/3}/L) j^{1/3} }
//!    <= j'(t0)
//! ```
//!
//! `nu / L` equals `1 / (3 (L^2+1)^{3/2})`.

use serde::Serialize;

use super::fixture::CrossingProfile;
use super::rearrangement::rearrangement_with_j;
use crate::error::{domain, Result};
use crate::kernel::quadrature::spectral_tail_remainder;
use crate::kernel::{polar_linear_at, polar_rate_at, HeightSampler, PolarRule};
use crate::modulus::Modulus;
use crate::quad::{integrate, QuadOptions};

/// Relative slack allowed on every link.
pub const CHAIN_RELATIVE_SLACK: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub left: f64,
    pub right: f64,
    /// Absolute allowance from quadrature budgets.
    pub allowance: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(name: &'static str, left: f64, right: f64, allowance: f64) -> Self {
        let slack = CHAIN_RELATIVE_SLACK * left.abs().max(right.abs()) + allowance;
        Self {
            name,
            left,
            right,
            allowance,
            holds: left <= right + slack,
        }
    }
}

/// Both sides of the chain as produced by one quadrature route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RouteValues {
    /// `D`.
    pub rate_gap: f64,
    /// `int (delta_h f(x0) - delta_h f(y0)) / |h|^3 dh`.
    pub linear_integral: f64,
    /// Absolute error allowance on `rate_gap` and `linear_integral`.
    pub budget: f64,
}

/// Links of the chain for given `D` and linear integral at `(t0, xi)`.
pub fn chain_links(m: &Modulus, t0: f64, xi: f64, values: &RouteValues) -> Result<Vec<ChainLink>> {
    if !(xi > 0.0 && xi < m.saturation_radius()) {
        return Err(domain(format!(
            "crossing distance {xi} must lie in (0, 2/nu) = (0, {})",
            m.saturation_radius()
        )));
    }
    let j = m.j(t0)?;
    let k = m.nu / m.l;
    let rearr = rearrangement_with_j(m, j, xi, 1e-11)?;
    let b1 = k * values.linear_integral;
    let b2 = k * rearr.value;
    let b3 = m.clock.decay_floor(j);
    let jprime = m.clock.rate(t0)?;
    Ok(vec![
        ChainLink::new("rate gap <= linear bound", values.rate_gap, b1, values.budget * (1.0 + k)),
        ChainLink::new("linear bound <= rearrangement", b1, b2, k * (values.budget + rearr.error_estimate)),
        ChainLink::new("rearrangement < dissipation", b2, b3, k * rearr.error_estimate),
        ChainLink::new("dissipation <= clock rate", b3, jprime, 1e-15),
    ])
}

/// A planar field `f(x) = G((x - c) . e)` with constant limits at `+-inf`.
pub trait PlanarField: HeightSampler {
    fn along(&self, s: f64) -> (f64, f64);
    fn coordinate(&self, x: [f64; 2]) -> f64;
    fn limits(&self) -> (f64, f64);
    fn saturation_half_width(&self) -> f64;
    fn kinks(&self) -> Vec<f64>;
}

impl PlanarField for CrossingProfile {
    fn along(&self, s: f64) -> (f64, f64) {
        self.profile(s)
    }

    fn coordinate(&self, x: [f64; 2]) -> f64 {
        CrossingProfile::coordinate(self, x)
    }

    fn limits(&self) -> (f64, f64) {
        let top = 0.5 * (self.j + 1.0);
        (-top, top)
    }

    fn saturation_half_width(&self) -> f64 {
        CrossingProfile::saturation_half_width(self)
    }

    fn kinks(&self) -> Vec<f64> {
        CrossingProfile::kinks(self)
    }
}

/// `r^{-1} f(r x)`, under which the Muskat equation is invariant.
#[derive(Clone, Copy, Debug)]
pub struct Rescaled<'a, P> {
    pub inner: &'a P,
    pub r: f64,
}

impl<P: PlanarField> HeightSampler for Rescaled<'_, P> {
    fn height(&self, x: [f64; 2]) -> f64 {
        self.inner.height([self.r * x[0], self.r * x[1]]) / self.r
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        self.inner.gradient([self.r * x[0], self.r * x[1]])
    }
}

impl<P: PlanarField> PlanarField for Rescaled<'_, P> {
    fn along(&self, s: f64) -> (f64, f64) {
        let (g, dg) = self.inner.along(self.r * s);
        (g / self.r, dg)
    }

    fn coordinate(&self, x: [f64; 2]) -> f64 {
        self.inner.coordinate([self.r * x[0], self.r * x[1]]) / self.r
    }

    fn limits(&self) -> (f64, f64) {
        let (a, b) = self.inner.limits();
        (a / self.r, b / self.r)
    }

    fn saturation_half_width(&self) -> f64 {
        self.inner.saturation_half_width() / self.r
    }

    fn kinks(&self) -> Vec<f64> {
        self.inner.kinks().iter().map(|k| k / self.r).collect()
    }
}

fn breakpoints_from(p: &impl PlanarField, s: f64, extra: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = p.kinks().iter().map(|k| (k - s).abs()).collect();
    b.extend_from_slice(extra);
    b
}

/// Exact reduction of the Muskat integral at coordinate `s` of a planar field:
/// `2 int_R (delta - G' h) / (delta^2 + h^2) dh`.
pub fn planar_rate(p: &impl PlanarField, s: f64, tol: f64) -> Result<(f64, f64)> {
    let (g0, slope) = p.along(s);
    let (lo, hi) = p.limits();
    let big_h = p.saturation_half_width() + s.abs();
    let pair = |h: f64| {
        let dp = p.along(s + h).0 - g0;
        let dm = p.along(s - h).0 - g0;
        (dp - slope * h) / (dp * dp + h * h) + (dm + slope * h) / (dm * dm + h * h)
    };
    let body = integrate(pair, 0.0, big_h, &breakpoints_from(p, s, &[]), QuadOptions::absolute(tol))?;
    let a = hi - g0;
    let b = g0 - lo;
    let tail = (a / big_h).atan() - (b / big_h).atan()
        + 0.5 * slope * ((a * a + big_h * big_h) / (b * b + big_h * big_h)).ln();
    Ok((2.0 * (body.value + tail), 2.0 * body.error))
}

/// Exact reduction of `int (delta_h f(x0) - delta_h f(y0)) / |h|^3 dh` for
/// a planar field, with `x0`, `y0` at coordinates `s0`, `s1`.
pub fn planar_linear_gap(p: &impl PlanarField, s0: f64, s1: f64, tol: f64) -> Result<(f64, f64)> {
    let (g0, g1) = (p.along(s0).0, p.along(s1).0);
    let big_h = p.saturation_half_width() + s0.abs().max(s1.abs());
    let pair = |h: f64| {
        let a = p.along(s0 + h).0 + p.along(s0 - h).0 - 2.0 * g0;
        let b = p.along(s1 + h).0 + p.along(s1 - h).0 - 2.0 * g1;
        (a - b) / (h * h)
    };
    let mut breaks = breakpoints_from(p, s0, &[]);
    breaks.extend(breakpoints_from(p, s1, &[]));
    let body = integrate(pair, 0.0, big_h, &breaks, QuadOptions::absolute(tol))?;
    let tail = -2.0 * (g0 - g1) / big_h;
    Ok((2.0 * (body.value + tail), 2.0 * body.error))
}

/// Linearised far field `int_{|h| > R} delta_h f / |h|^3 dh` of a planar
/// field, reduced to one dimension with the kernel
/// `k_R(h1) = (2/h1^2)(1 - sqrt(1 - h1^2/R^2))` inside `|h1| < R`.
fn planar_far_linear(p: &impl PlanarField, s: f64, outer: f64) -> Result<f64> {
    let g0 = p.along(s).0;
    let (lo, hi) = p.limits();
    if outer <= p.saturation_half_width() + s.abs() {
        return Err(domain("outer radius must exceed the saturation width of the field"));
    }
    let kernel = |h: f64| {
        let x = (h / outer).powi(2);
        (2.0 / (outer * outer)) / (1.0 + (1.0 - x).max(0.0).sqrt())
    };
    let f = |h: f64| (p.along(s + h).0 - g0) * kernel(h);
    let breaks = breakpoints_from(p, s, &[]);
    let mut all: Vec<f64> = breaks.iter().flat_map(|b| [*b, -*b]).collect();
    all.extend(p.kinks().iter().map(|k| k - s));
    let inside = integrate(f, -outer, outer, &all, QuadOptions::absolute(1e-13))?.value;
    let outside = 2.0 * ((hi - g0) + (lo - g0)) / outer;
    Ok(inside + outside)
}

/// Parameters of the two-dimensional route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolarRoute {
    pub rho0: f64,
    pub outer_radius: f64,
    pub rings: usize,
    pub sectors: usize,
}

impl Default for PolarRoute {
    fn default() -> Self {
        Self {
            rho0: 1e-5,
            outer_radius: 2000.0,
            rings: 1500,
            sectors: 720,
        }
    }
}

/// Route 1: one-dimensional reductions, exact for planar fields.
pub fn route_planar(p: &impl PlanarField, x0: [f64; 2], y0: [f64; 2]) -> Result<RouteValues> {
    let (s0, s1) = (p.coordinate(x0), p.coordinate(y0));
    let tol = 1e-11;
    let (r0, e0) = planar_rate(p, s0, tol)?;
    let (r1, e1) = planar_rate(p, s1, tol)?;
    let (lin, el) = planar_linear_gap(p, s0, s1, tol)?;
    Ok(RouteValues {
        rate_gap: r0 - r1,
        linear_integral: lin,
        budget: e0 + e1 + el,
    })
}

/// Route 2: tensor polar quadrature of the two-dimensional integrals, with
/// the far field linearised.
pub fn route_polar(p: &impl PlanarField, x0: [f64; 2], y0: [f64; 2], q: &PolarRoute) -> Result<RouteValues> {
    let rule = PolarRule::new(q.rho0, q.outer_radius, q.rings, q.sectors);
    let (s0, s1) = (p.coordinate(x0), p.coordinate(y0));
    let far0 = planar_far_linear(p, s0, q.outer_radius)?;
    let far1 = planar_far_linear(p, s1, q.outer_radius)?;
    let (lo, hi) = p.limits();
    let osc = hi - lo;
    let remainder = |x: [f64; 2]| {
        let g = p.gradient(x);
        spectral_tail_remainder(osc, g[0].hypot(g[1]), q.outer_radius)
    };
    let rate0 = polar_rate_at(p, x0, &rule);
    let rate1 = polar_rate_at(p, y0, &rule);
    let lin0 = polar_linear_at(p, x0, &rule);
    let lin1 = polar_linear_at(p, y0, &rule);
    Ok(RouteValues {
        rate_gap: (rate0.value + far0) - (rate1.value + far1),
        linear_integral: (lin0.value + far0) - (lin1.value + far1),
        budget: rate0.inner_budget + rate1.inner_budget + lin0.inner_budget + lin1.inner_budget
            + remainder(x0)
            + remainder(y0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingChainReport {
    pub l: f64,
    pub t: f64,
    pub j: f64,
    pub xi: f64,
    pub planar: RouteValues,
    pub polar: RouteValues,
    /// Largest relative disagreement between the routes on `D` and on the
    /// linear integral.
    pub route_discrepancy: f64,
    pub planar_links: Vec<ChainLink>,
    pub polar_links: Vec<ChainLink>,
    /// `D < j'(t0)`: the touching configuration cannot persist.
    pub contradiction: bool,
    pub holds: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Evaluates the chain at a crossing fixture with both quadrature routes.
pub fn crossing_bound_chain(m: &Modulus, t: f64, profile: &CrossingProfile, q: &PolarRoute) -> Result<CrossingChainReport> {
    if profile.period.is_some() {
        return Err(domain("the bound chain needs the infinite-plane fixture"));
    }
    let (x0, y0) = (profile.x0(), profile.y0());
    if x0 == y0 {
        return Err(domain("crossing points must be distinct"));
    }
    let j = m.j(t)?;
    if (j - profile.j).abs() > 1e-15 {
        return Err(domain(format!(
            "fixture was built for j = {} but j({t}) = {j}",
            profile.j
        )));
    }
    let planar = route_planar(profile, x0, y0)?;
    let polar = route_polar(profile, x0, y0, q)?;
    let planar_links = chain_links(m, t, profile.xi, &planar)?;
    let polar_links = chain_links(m, t, profile.xi, &polar)?;
    let jprime = m.clock.rate(t)?;
    let holds = planar_links.iter().chain(&polar_links).all(|l| l.holds);
    Ok(CrossingChainReport {
        l: m.l,
        t,
        j,
        xi: profile.xi,
        route_discrepancy: rel(planar.rate_gap, polar.rate_gap).max(rel(planar.linear_integral, polar.linear_integral)),
        planar,
        polar,
        planar_links,
        polar_links,
        contradiction: planar.rate_gap < jprime,
        holds,
    })
}

/// Rate gap and linear integral of the fixture rescaled by `r`, evaluated
/// at the rescaled crossing points.
pub fn rescaled_routes(profile: &CrossingProfile, r: f64, q: &PolarRoute) -> Result<(RouteValues, RouteValues)> {
    if !(r > 0.0) {
        return Err(domain(format!("scale must be positive, got {r}")));
    }
    let scaled = Rescaled { inner: profile, r };
    let (x0, y0) = (profile.x0(), profile.y0());
    let x0s = [x0[0] / r, x0[1] / r];
    let y0s = [y0[0] / r, y0[1] / r];
    Ok((route_planar(&scaled, x0s, y0s)?, route_polar(&scaled, x0s, y0s, q)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_rate_of_flat_field_vanishes_and_of_small_ramp_is_finite() {
        let m = Modulus::new(2.0).unwrap();
        let p = CrossingProfile::new(&m, m.clock.t1, 1.0).unwrap();
        let (r, _) = planar_rate(&p, 0.5, 1e-11).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn chain_at_unit_distance() {
        let m = Modulus::new(2.0).unwrap();
        let t = m.clock.t1;
        let p = CrossingProfile::new(&m, t, 1.0).unwrap();
        let report = crossing_bound_chain(&m, t, &p, &PolarRoute::default()).unwrap();
        assert!(report.holds, "{report:#?}");
        assert!(report.route_discrepancy < 1e-3, "{report:#?}");
        assert!(report.contradiction);
    }

    #[test]
    fn far_distance_rejected() {
        let m = Modulus::new(2.0).unwrap();
        let v = RouteValues {
            rate_gap: 0.0,
            linear_integral: 0.0,
            budget: 0.0,
        };
        assert!(chain_links(&m, 0.0, m.saturation_radius(), &v).is_err());
    }
}
