//! Crossing reports and the bound chain evaluated on grid data.

use serde::Serialize;

use super::monitors::ModulusCheck;
use crate::error::Result;
use crate::kernel::{InterfaceField, RateField, Spectral2d};
use crate::lemmas::chain::{chain_links, ChainLink, RouteValues};
use crate::modulus::Modulus;
use rustfft::num_complex::Complex64;

/// A pair is reported once its deficit drops below `-CROSSING_SLACK`.
pub const CROSSING_SLACK: f64 = 1e-9;
/// Increment conditions may fail by this fraction of `nu |h|`.
pub const SIDE_RELATIVE_TOL: f64 = 1e-4;
pub const GRADIENT_ANGLE_TOL_DEG: f64 = 5.0;
pub const GRADIENT_MAGNITUDE_TOL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideCondition {
    pub name: &'static str,
    /// Smallest slack over sampled `h`; negative means violated.
    pub margin: f64,
    /// Offset `h` (in grid cells) where the margin is attained.
    pub worst_offset: (isize, isize),
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientMatch {
    pub grad_x0: [f64; 2],
    pub grad_y0: [f64; 2],
    /// `d_r omega(t0, xi) (x0 - y0) / |x0 - y0|`.
    pub expected: [f64; 2],
    pub angle_x0_deg: f64,
    pub angle_y0_deg: f64,
    pub magnitude_ratio_x0: f64,
    pub magnitude_ratio_y0: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingReport {
    pub step: u64,
    pub t0: f64,
    pub x0: (usize, usize),
    pub y0: (usize, usize),
    pub xi: f64,
    pub deficit: f64,
    pub increments_ordered: SideCondition,
    pub upper_growth_x0: SideCondition,
    pub lower_growth_y0: SideCondition,
    pub gradient: GradientMatch,
}

impl CrossingReport {
    pub fn side_conditions_hold(&self) -> bool {
        self.increments_ordered.holds && self.upper_growth_x0.holds && self.lower_growth_y0.holds && self.gradient.holds
    }
}

/// Minimal-image displacement from `b` to `a`.
fn displacement(field: &InterfaceField, a: (usize, usize), b: (usize, usize)) -> [f64; 2] {
    let g = field.grid;
    let dx = g.spacing();
    [
        g.wrap_offset(a.0 as isize - b.0 as isize) as f64 * dx,
        g.wrap_offset(a.1 as isize - b.1 as isize) as f64 * dx,
    ]
}

fn angle_deg(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot).to_degrees()
}

/// Builds a report when `check` found a pair below the modulus, with the
/// side conditions sampled over every grid offset in the fundamental cell.
pub fn detect_crossing(field: &InterfaceField, m: &Modulus, check: &ModulusCheck, step: u64) -> Option<CrossingReport> {
    if !(check.min_deficit <= -CROSSING_SLACK) || check.x == check.y {
        return None;
    }
    let g = field.grid;
    let n = g.n() as isize;
    let dx = g.spacing();
    let (x0, y0) = (check.x, check.y);
    let at = |p: (usize, usize), d: (isize, isize)| {
        field.at(
            (p.0 as isize + d.0).rem_euclid(n) as usize,
            (p.1 as isize + d.1).rem_euclid(n) as usize,
        )
    };
    let (fx, fy) = (field.at(x0.0, x0.1), field.at(y0.0, y0.1));
    let mut conds = [
        ("delta_h f(x0) <= delta_h f(y0)", f64::INFINITY, (0, 0), f64::INFINITY),
        ("delta_h f(x0) <= nu |h|", f64::INFINITY, (0, 0), f64::INFINITY),
        ("delta_h f(y0) >= -nu |h|", f64::INFINITY, (0, 0), f64::INFINITY),
    ];
    for d1 in (1 - n / 2)..=(n / 2) {
        for d2 in (1 - n / 2)..=(n / 2) {
            if (d1, d2) == (0, 0) {
                continue;
            }
            let h = dx * (d1 as f64).hypot(d2 as f64);
            let dfx = at(x0, (d1, d2)) - fx;
            let dfy = at(y0, (d1, d2)) - fy;
            let scale = m.nu * h;
            let margins = [dfy - dfx, scale - dfx, dfy + scale];
            for (c, margin) in conds.iter_mut().zip(margins) {
                // ranked by margin / (nu |h|)
                if margin / scale < c.3 {
                    c.1 = margin;
                    c.2 = (d1, d2);
                    c.3 = margin / scale;
                }
            }
        }
    }
    let side = |c: &(&'static str, f64, (isize, isize), f64)| SideCondition {
        name: c.0,
        margin: c.1,
        worst_offset: c.2,
        holds: c.3 >= -SIDE_RELATIVE_TOL,
    };

    let grad = |p: (usize, usize)| {
        [
            (at(p, (1, 0)) - at(p, (-1, 0))) / (2.0 * dx),
            (at(p, (0, 1)) - at(p, (0, -1))) / (2.0 * dx),
        ]
    };
    let (gx, gy) = (grad(x0), grad(y0));
    let d = displacement(field, x0, y0);
    let xi = d[0].hypot(d[1]);
    let slope = m.profile_slope(xi);
    let dr = 0.5 * (slope.left + slope.right);
    let expected = [dr * d[0] / xi, dr * d[1] / xi];
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let (ax, ay) = (angle_deg(gx, expected), angle_deg(gy, expected));
    let (rx, ry) = (norm(gx) / norm(expected), norm(gy) / norm(expected));
    let gradient = GradientMatch {
        grad_x0: gx,
        grad_y0: gy,
        expected,
        angle_x0_deg: ax,
        angle_y0_deg: ay,
        magnitude_ratio_x0: rx,
        magnitude_ratio_y0: ry,
        holds: ax <= GRADIENT_ANGLE_TOL_DEG
            && ay <= GRADIENT_ANGLE_TOL_DEG
            && (rx - 1.0).abs() <= GRADIENT_MAGNITUDE_TOL
            && (ry - 1.0).abs() <= GRADIENT_MAGNITUDE_TOL,
    };

    Some(CrossingReport {
        step,
        t0: field.time,
        x0,
        y0,
        xi,
        deficit: check.min_deficit,
        increments_ordered: side(&conds[0]),
        upper_growth_x0: side(&conds[1]),
        lower_growth_y0: side(&conds[2]),
        gradient,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainVerdict {
    pub t0: f64,
    pub j: f64,
    pub values: RouteValues,
    pub links: Vec<ChainLink>,
    /// First link that fails numerically, if any.
    pub first_failure: Option<&'static str>,
    pub jprime: f64,
    /// Five-point finite difference of the closed-form clock at `t0`.
    pub jprime_fd: f64,
    /// `D < j'(t0)`: the chain forbids this touching configuration.
    pub contradiction: bool,
}

/// Five-point central difference of `j` at `t`.
pub fn clock_rate_fd(m: &Modulus, t: f64, h: f64) -> Result<f64> {
    let j = |s: f64| m.j(s);
    Ok((j(t - 2.0 * h)? - 8.0 * j(t - h)? + 8.0 * j(t + h)? - j(t + 2.0 * h)?) / (12.0 * h))
}

/// Evaluates the bound chain at a reported crossing. `rates` must be the
/// operator output for `field`; the linear integral is taken through its
/// exact multiplier `-2 pi |k|` on the trigonometric interpolant.
pub fn contradiction_chain(report: &CrossingReport, field: &InterfaceField, rates: &RateField, m: &Modulus) -> Result<ChainVerdict> {
    let g = field.grid;
    let (ix, iy) = (g.index(report.x0.0, report.x0.1), g.index(report.y0.0, report.y0.1));
    let two_pi = 2.0 * std::f64::consts::PI;
    let linear = Spectral2d::new(g).apply(&field.values, |k1, k2| Complex64::new(-two_pi * k1.hypot(k2), 0.0));
    let values = RouteValues {
        rate_gap: rates.rates[ix] - rates.rates[iy],
        linear_integral: linear[ix] - linear[iy],
        budget: rates.budget[ix] + rates.budget[iy],
    };
    let links = chain_links(m, report.t0, report.xi, &values)?;
    let jprime = m.clock.rate(report.t0)?;
    let h = 1e-3_f64.max(1e-6 * report.t0);
    let jprime_fd = if report.t0 >= 2.0 * h {
        clock_rate_fd(m, report.t0, h)?
    } else {
        // One-sided at the start of the clock.
        let j = |s: f64| m.j(s);
        (-3.0 * j(report.t0)? + 4.0 * j(report.t0 + h)? - j(report.t0 + 2.0 * h)?) / (2.0 * h)
    };
    Ok(ChainVerdict {
        t0: report.t0,
        j: m.j(report.t0)?,
        first_failure: links.iter().find(|l| !l.holds).map(|l| l.name),
        links,
        values,
        jprime,
        jprime_fd,
        contradiction: values.rate_gap < jprime,
    })
}
