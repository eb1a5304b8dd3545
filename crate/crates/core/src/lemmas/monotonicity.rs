//! Brute-force search for the minimum of the slope-monotonicity gap
//! `[(a+b)/(a^2+1)^{3/2} - (c+b)/(c^2+1)^{3/2}] - (a-c) / (3 (L^2+1)^{3/2})`
//! over the admissible box of slope triples.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::modulus::nu_of;

/// Slopes `(alpha_hi, alpha_lo, beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeTriple {
    pub alpha_hi: f64,
    pub alpha_lo: f64,
    pub beta: f64,
}

impl SlopeTriple {
    pub fn new(alpha_hi: f64, alpha_lo: f64, beta: f64) -> Self {
        Self {
            alpha_hi,
            alpha_lo,
            beta,
        }
    }

    /// Checks the admissible box for Lipschitz budget `l`.
    pub fn check(&self, l: f64) -> Result<()> {
        let nu = nu_of(l)?;
        let Self {
            alpha_hi: hi,
            alpha_lo: lo,
            beta,
        } = *self;
        let ok = lo <= hi && (-l..=nu).contains(&lo) && (-nu..=l).contains(&hi) && beta.abs() <= nu;
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration(format!(
                "slope triple ({hi}, {lo}, {beta}) lies outside the admissible box for L = {l}"
            )))
        }
    }

    /// Mirror image `(-lo, -hi, -beta)`, which leaves the gap unchanged.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.alpha_lo, -self.alpha_hi, -self.beta)
    }
}

fn g(alpha: f64, beta: f64) -> f64 {
    (alpha + beta) / (alpha * alpha + 1.0).powf(1.5)
}

fn floor_slope(l: f64) -> f64 {
    1.0 / (3.0 * (l * l + 1.0).powf(1.5))
}

fn gap_unchecked(t: &SlopeTriple, l: f64) -> f64 {
    g(t.alpha_hi, t.beta) - g(t.alpha_lo, t.beta) - (t.alpha_hi - t.alpha_lo) * floor_slope(l)
}

fn quotient_unchecked(t: &SlopeTriple) -> Option<f64> {
    let d = t.alpha_hi - t.alpha_lo;
    (d > 0.0).then(|| (g(t.alpha_hi, t.beta) - g(t.alpha_lo, t.beta)) / d)
}

/// LHS minus RHS of the monotonicity inequality.
pub fn monotonicity_gap(t: &SlopeTriple, l: f64) -> Result<f64> {
    t.check(l)?;
    Ok(gap_unchecked(t, l))
}

/// Difference quotient `[g(hi) - g(lo)] / (hi - lo)`; `None` when `hi == lo`.
pub fn monotonicity_quotient(t: &SlopeTriple, l: f64) -> Result<Option<f64>> {
    t.check(l)?;
    Ok(quotient_unchecked(t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub l: f64,
    pub nu: f64,
    pub resolution: usize,
    pub triples_checked: usize,
    pub min_gap: f64,
    pub argmin_gap: SlopeTriple,
    /// Smallest difference quotient, which the inequality compares with
    /// `1 / (3 (L^2+1)^{3/2})`.
    pub min_quotient: f64,
    pub quotient_floor: f64,
    /// Minimiser of the quotient, reflected so that `hi + lo >= 0`.
    pub argmin_quotient: SlopeTriple,
    pub predicted_minimizer: SlopeTriple,
    pub distance_to_predicted: f64,
    pub slack: f64,
    pub passed: bool,
}

struct Box3 {
    l: f64,
    nu: f64,
}

impl Box3 {
    fn project(&self, t: SlopeTriple) -> SlopeTriple {
        let hi = t.alpha_hi.clamp(-self.nu, self.l);
        let lo = t.alpha_lo.clamp(-self.l, self.nu).min(hi);
        SlopeTriple::new(hi, lo, t.beta.clamp(-self.nu, self.nu))
    }
}

/// Coordinate descent with shrinking steps inside the box.
fn refine<F: Fn(&SlopeTriple) -> f64>(start: SlopeTriple, step0: [f64; 3], bx: &Box3, objective: F) -> (SlopeTriple, f64) {
    let mut best = start;
    let mut best_val = objective(&best);
    let mut step = step0;
    for _ in 0..50 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut cand = best;
                match axis {
                    0 => cand.alpha_hi += sign * step[0],
                    1 => cand.alpha_lo += sign * step[1],
                    _ => cand.beta += sign * step[2],
                }
                let cand = bx.project(cand);
                let v = objective(&cand);
                if v < best_val {
                    best = cand;
                    best_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    (best, best_val)
}

fn canonical(t: SlopeTriple) -> SlopeTriple {
    if t.alpha_hi + t.alpha_lo >= 0.0 {
        t
    } else {
        t.mirrored()
    }
}

fn distance(a: &SlopeTriple, b: &SlopeTriple) -> f64 {
    ((a.alpha_hi - b.alpha_hi).powi(2) + (a.alpha_lo - b.alpha_lo).powi(2) + (a.beta - b.beta).powi(2)).sqrt()
}

/// Sweeps a uniform grid with `resolution` points per axis (endpoints
/// included), then refines both the gap minimum and the quotient minimum.
pub fn verify_monotonicity(l: f64, resolution: usize) -> Result<MonotonicityReport> {
    let nu = nu_of(l)?;
    if resolution < 2 {
        return Err(domain(format!("resolution must be >= 2, got {resolution}")));
    }
    let m = (resolution - 1) as f64;
    let hi_at = |i: usize| if i == resolution - 1 { l } else { -nu + (l + nu) * i as f64 / m };
    let lo_at = |k: usize| if k == resolution - 1 { nu } else { -l + (l + nu) * k as f64 / m };
    let beta_at = |q: usize| if q == resolution - 1 { nu } else { -nu + 2.0 * nu * q as f64 / m };
    let floor = floor_slope(l);

    #[derive(Clone, Copy)]
    struct Best {
        count: usize,
        gap: (f64, SlopeTriple),
        quot: (f64, SlopeTriple),
    }
    let per_hi: Vec<Best> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let hi = hi_at(i);
            let init = SlopeTriple::new(hi, -l, -nu);
            let mut best = Best {
                count: 0,
                gap: (f64::INFINITY, init),
                quot: (f64::INFINITY, init),
            };
            for k in 0..resolution {
                let lo = lo_at(k);
                if lo > hi {
                    break;
                }
                for q in 0..resolution {
                    let t = SlopeTriple::new(hi, lo, beta_at(q));
                    best.count += 1;
                    let gap = gap_unchecked(&t, l);
                    if gap < best.gap.0 {
                        best.gap = (gap, t);
                    }
                    if let Some(qv) = quotient_unchecked(&t) {
                        if qv < best.quot.0 {
                            best.quot = (qv, t);
                        }
                    }
                }
            }
            best
        })
        .collect();

    // Ordered reduction: first strict minimum in sweep order wins.
    let mut count = 0;
    let mut gap_best = per_hi[0].gap;
    let mut quot_best = per_hi[0].quot;
    for b in &per_hi {
        count += b.count;
        if b.gap.0 < gap_best.0 {
            gap_best = b.gap;
        }
        if b.quot.0 < quot_best.0 {
            quot_best = b.quot;
        }
    }

    let bx = Box3 { l, nu };
    let h = [(l + nu) / m, (l + nu) / m, 2.0 * nu / m];
    let (gap_t, gap_v) = refine(gap_best.1, h, &bx, |t| gap_unchecked(t, l));
    let (quot_t, quot_v) = refine(quot_best.1, h, &bx, |t| {
        quotient_unchecked(t).unwrap_or(f64::INFINITY)
    });
    let min_gap = gap_v.min(gap_best.0);
    let argmin_gap = if gap_v <= gap_best.0 { gap_t } else { gap_best.1 };
    let argmin_quotient = canonical(if quot_v <= quot_best.0 { quot_t } else { quot_best.1 });
    let predicted = SlopeTriple::new(l, nu, nu);
    let slack = 1e-12;
    Ok(MonotonicityReport {
        l,
        nu,
        resolution,
        triples_checked: count,
        min_gap,
        argmin_gap,
        min_quotient: quot_v.min(quot_best.0),
        quotient_floor: floor,
        argmin_quotient,
        predicted_minimizer: predicted,
        distance_to_predicted: distance(&argmin_quotient, &predicted),
        slack,
        passed: min_gap >= -slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_slopes_give_zero_gap() {
        let nu = nu_of(2.0).unwrap();
        let t = SlopeTriple::new(0.01, 0.01, 0.5 * nu);
        assert_eq!(monotonicity_gap(&t, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn box_violation_rejected() {
        let nu = nu_of(2.0).unwrap();
        assert!(monotonicity_gap(&SlopeTriple::new(3.0, 0.0, 0.0), 2.0).is_err());
        assert!(monotonicity_gap(&SlopeTriple::new(0.0, 0.5, 0.0), 2.0).is_err());
        assert!(monotonicity_gap(&SlopeTriple::new(1.0, 0.0, 2.0 * nu), 2.0).is_err());
    }

    #[test]
    fn predicted_corner_is_positive() {
        let nu = nu_of(2.0).unwrap();
        let gap = monotonicity_gap(&SlopeTriple::new(2.0, nu, nu), 2.0).unwrap();
        assert!(gap > 0.0);
    }

    #[test]
    fn coarse_sweep_finds_corner() {
        let r = verify_monotonicity(2.0, 40).unwrap();
        assert!(r.passed);
        assert!(r.distance_to_predicted < 1e-6, "{:?}", r.argmin_quotient);
        assert!(r.min_quotient > r.quotient_floor);
    }

    proptest! {
        #[test]
        fn gap_invariant_under_mirror(a in 0.0f64..1.0, b in 0.0f64..1.0, c in -1.0f64..1.0, l in 1.0f64..10.0) {
            let nu = nu_of(l).unwrap();
            let hi = -nu + a * (l + nu);
            let lo = (-l + b * (l + nu)).min(hi);
            let t = SlopeTriple::new(hi, lo, c * nu);
            let g1 = monotonicity_gap(&t, l).unwrap();
            let g2 = monotonicity_gap(&t.mirrored(), l).unwrap();
            prop_assert!((g1 - g2).abs() < 1e-14);
            prop_assert!(g1 >= -1e-12);
        }
    }
}
