//! One-dimensional rearrangement integrals of the modulus and the
//! dissipation bound they are compared against.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::modulus::Modulus;
use crate::quad::{integrate, QuadOptions, QuadResult};

/// Width of the patch near `eta = 0` where the near integrand is replaced
/// by its limit.
const NEAR_PATCH: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RearrangementValue {
    pub near: f64,
    pub far: f64,
    /// Closed-form part of the far integral past saturation.
    pub far_tail: f64,
    pub value: f64,
    pub error_estimate: f64,
}

fn knots(m: &Modulus) -> [f64; 2] {
    [2.0, m.saturation_radius()]
}

/// Near integrand `[w(xi+2e) + w(xi-2e) - 2 w(xi)] / e^2`; the clock
/// value cancels.
fn near_integrand(m: &Modulus, xi: f64, eta: f64) -> f64 {
    (m.profile(xi + 2.0 * eta) + m.profile(xi - 2.0 * eta) - 2.0 * m.profile(xi)) / (eta * eta)
}

/// `int_0^{xi/2} [w(xi+2e) + w(xi-2e) - 2 w(xi)] / e^2 de`.
pub fn near_integral(m: &Modulus, xi: f64, tol: f64) -> Result<QuadResult> {
    let kn = knots(m);
    let dist = kn.iter().map(|k| (k - xi).abs()).fold(f64::INFINITY, f64::min);
    if dist == 0.0 {
        return Err(domain(format!(
            "near integral diverges when xi = {xi} sits on a kink of the profile"
        )));
    }
    let upper = 0.5 * xi;
    let patch = NEAR_PATCH.min(0.5 * upper).min(0.25 * dist);
    // Limit 4 w''(xi) on the patch; the second difference loses all digits there.
    let curvature = m.profile_curvature(xi).unwrap_or(0.0);
    let patch_value = 4.0 * curvature * patch;
    let breaks: Vec<f64> = kn.iter().map(|k| 0.5 * (k - xi).abs()).collect();
    let body = integrate(
        |eta| near_integrand(m, xi, eta),
        patch,
        upper,
        &breaks,
        QuadOptions::absolute(tol),
    )?;
    Ok(QuadResult {
        value: patch_value + body.value,
        ..body
    })
}

/// `int_{xi/2}^inf [w(2e+xi) - w(2e-xi) - 2 w(xi)] / e^2 de`, split at the
/// saturation point `(2/nu + xi)/2` past which the integrand is
/// `-2 w(xi) / e^2`.
pub fn far_integral(m: &Modulus, j: f64, xi: f64, tol: f64) -> Result<(QuadResult, f64)> {
    let sat = m.saturation_radius();
    let lower = 0.5 * xi;
    let upper = 0.5 * (sat + xi);
    let w_xi = j + m.profile(xi);
    let f = |eta: f64| {
        (m.profile(2.0 * eta + xi) - m.profile(2.0 * eta - xi) - 2.0 * w_xi) / (eta * eta)
    };
    let breaks = [0.5 * (2.0 - xi), 0.5 * (sat - xi), 0.5 * (2.0 + xi)];
    let body = integrate(f, lower, upper, &breaks, QuadOptions::absolute(tol))?;
    let tail = -2.0 * w_xi / upper;
    Ok((body, tail))
}

/// Sum of the near and far rearrangement integrals at time `t`.
pub fn rearrangement_rhs(m: &Modulus, t: f64, xi: f64, tol: f64) -> Result<RearrangementValue> {
    let j = m.j(t)?;
    rearrangement_with_j(m, j, xi, tol)
}

/// As [`rearrangement_rhs`] with the clock value supplied directly.
pub fn rearrangement_with_j(m: &Modulus, j: f64, xi: f64, tol: f64) -> Result<RearrangementValue> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(domain(format!("xi must be positive, got {xi}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let near = near_integral(m, xi, 0.5 * tol)?;
    let (far, far_tail) = far_integral(m, j, xi, 0.5 * tol)?;
    Ok(RearrangementValue {
        near: near.value,
        far: far.value + far_tail,
        far_tail,
        value: near.value + far.value + far_tail,
        error_estimate: near.error + far.error,
    })
}

/// `-min{ nu w0 + nu^2/2, w0^{1/3} nu^{2/3} }` with `w0 = j`.
pub fn dissipation_target(nu: f64, j: f64) -> f64 {
    -(nu * j + 0.5 * nu * nu).min(j.cbrt() * nu.powf(2.0 / 3.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DissipationReport {
    pub xi: f64,
    pub j: f64,
    pub near_integral: f64,
    pub far_integral: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub bound: f64,
    pub holds: bool,
    /// Whether the near integrand reaches past the kink at `r = 2`.
    pub kink_in_support: bool,
}

/// Compares the rearrangement integrals against the dissipation bound.
pub fn dissipation_bound(m: &Modulus, t: f64, xi: f64) -> Result<DissipationReport> {
    let j = m.j(t)?;
    dissipation_with_j(m, j, xi)
}

pub fn dissipation_with_j(m: &Modulus, j: f64, xi: f64) -> Result<DissipationReport> {
    if !(xi > 0.0 && xi < m.saturation_radius()) {
        return Err(domain(format!(
            "xi must lie in (0, 2/nu) = (0, {}), got {xi}",
            m.saturation_radius()
        )));
    }
    let r = rearrangement_with_j(m, j, xi, 1e-11)?;
    let bound = dissipation_target(m.nu, j);
    Ok(DissipationReport {
        xi,
        j,
        near_integral: r.near,
        far_integral: r.far,
        value: r.value,
        error_estimate: r.error_estimate,
        bound,
        holds: r.value + r.error_estimate < bound,
        kink_in_support: 2.0 * xi > 2.0,
    })
}

/// Integrand of the small-`xi` constant, with its Taylor series near 0.
pub fn kiselev_integrand(eta: f64) -> f64 {
    if eta < 1e-3 {
        let e2 = eta * eta;
        3.0 + 0.75 * e2 + 0.875 * e2 * e2
    } else {
        ((1.0 + 2.0 * eta).powf(1.5) + (1.0 - 2.0 * eta).powf(1.5) - 2.0) / (eta * eta)
    }
}

/// `int_0^{1/2} [(1+2e)^{3/2} + (1-2e)^{3/2} - 2] / e^2 de`.
pub fn kiselev_integral_constant(tol: f64) -> Result<QuadResult> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    integrate(kiselev_integrand, 0.0, 0.5, &[1e-3], QuadOptions::absolute(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kiselev_limits() {
        assert_eq!(kiselev_integrand(0.0), 3.0);
        let end = (2f64.powf(1.5) - 2.0) / 0.25;
        assert!((kiselev_integrand(0.5) - end).abs() < 1e-14);
        // series and closed form agree at the switch
        let e: f64 = 1e-3;
        let closed = ((1.0 + 2.0 * e).powf(1.5) + (1.0 - 2.0 * e).powf(1.5) - 2.0) / (e * e);
        assert!((kiselev_integrand(0.999e-3) - closed).abs() < 1e-8);
    }

    #[test]
    fn kiselev_value_in_band() {
        let v = kiselev_integral_constant(1e-10).unwrap().value;
        assert!(v > 1.5 && v < 1.6, "{v}");
    }

    #[test]
    fn small_xi_matches_scaling_law() {
        // For xi <= 1 the near integral is -nu sqrt(xi) K / 2^{3/2}.
        let m = Modulus::new(2.0).unwrap();
        let k = kiselev_integral_constant(1e-12).unwrap().value;
        for xi in [0.1, 0.5, 1.0] {
            let near = near_integral(&m, xi, 1e-12).unwrap().value;
            let expected = -m.nu * xi.sqrt() * k / 2f64.powf(1.5);
            assert!((near - expected).abs() < 1e-9, "xi={xi}: {near} vs {expected}");
        }
    }

    #[test]
    fn xi_one_is_negative_and_bound_holds() {
        let m = Modulus::new(2.0).unwrap();
        let r = rearrangement_rhs(&m, 0.0, 1.0, 1e-10).unwrap();
        assert!(r.value < 0.0);
        assert!(dissipation_bound(&m, 0.0, 0.5).unwrap().holds);
    }

    #[test]
    fn domain_checks() {
        let m = Modulus::new(2.0).unwrap();
        assert!(dissipation_bound(&m, 0.0, 0.0).is_err());
        assert!(dissipation_bound(&m, 0.0, m.saturation_radius()).is_err());
        assert!(near_integral(&m, 2.0, 1e-10).is_err());
    }

    #[test]
    fn closed_form_tail_matches_direct_integration() {
        let m = Modulus::new(2.0).unwrap();
        let (j, xi) = (0.3, 3.0);
        let (_, tail) = far_integral(&m, j, xi, 1e-12).unwrap();
        let split = 0.5 * (m.saturation_radius() + xi);
        let w = j + m.profile(xi);
        let f = |e: f64| (m.profile(2.0 * e + xi) - m.profile(2.0 * e - xi) - 2.0 * w) / (e * e);
        let direct = integrate(f, split, 1e3 * split, &[], QuadOptions::absolute(1e-12)).unwrap().value;
        assert!((direct - tail * (1.0 - 1e-3)).abs() < 1e-10);
    }

    #[test]
    fn vacuous_bound_after_extinction() {
        let m = Modulus::new(2.0).unwrap();
        let r = dissipation_bound(&m, m.clock.tstar() * 1.01, 0.5).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.value <= 0.0);
    }
}
