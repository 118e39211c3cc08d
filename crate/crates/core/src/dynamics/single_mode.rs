use super::{clamped_exp, Instant};
use crate::error::{Error, Result};
use crate::quantities::{check_non_negative, check_positive, validity_window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModePoint {
    pub t: f64,
    pub u: f64,
    pub variance: f64,
    /// Whether `D < 1/t < 2C` holds at this point.
    pub in_window: bool,
    pub clamped: bool,
}

/// `(Δx₁)² = ¼ e^{−2u} + ⅛ e^{2u} D t` with u = 2Ct.
pub fn single_mode_variance(coupling: f64, damping: f64, at: Instant) -> Result<SingleModePoint> {
    check_positive("coupling", coupling)?;
    check_non_negative("damping", damping)?;
    let (t, u) = at.resolve(2.0 * coupling)?;
    let (shrink, c1) = clamped_exp(-2.0 * u);
    let (grow, c2) = clamped_exp(2.0 * u);
    let variance = 0.25 * shrink + 0.125 * grow * damping * t;
    let in_window = validity_window(coupling, damping)?.contains(t);
    Ok(SingleModePoint { t, u, variance, in_window, clamped: c1 || c2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumStatus {
    /// Minimum at finite u > 0.
    Interior,
    /// D = 0: the variance decreases forever.
    NoInteriorMinimum,
    /// Noise so strong that the variance never drops below its t = 0 value.
    AtOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeOptimum {
    pub u_star: f64,
    pub t_star: f64,
    pub min_variance: f64,
    pub status: OptimumStatus,
    /// `0 < D < 2C`, the regime where the damped formula is meaningful.
    pub within_validity: bool,
}

/// Minimises the single-mode variance over u ≥ 0.
///
/// The derivative in u is strictly increasing, so its root is bracketed and
/// then found by Newton steps safeguarded by bisection.
pub fn optimal_single_mode_squeezing(coupling: f64, damping: f64) -> Result<SingleModeOptimum> {
    check_positive("coupling", coupling)?;
    check_non_negative("damping", damping)?;
    let within_validity = damping > 0.0 && damping < 2.0 * coupling;
    if damping == 0.0 {
        return Ok(SingleModeOptimum {
            u_star: f64::INFINITY,
            t_star: f64::INFINITY,
            min_variance: 0.0,
            status: OptimumStatus::NoInteriorMinimum,
            within_validity,
        });
    }
    // f(u) = ¼e^{−2u} + a·u·e^{2u}, a = D/(16C)
    let a = damping / (16.0 * coupling);
    let slope = |u: f64| -0.5 * (-2.0 * u).exp() + a * (2.0 * u).exp() * (1.0 + 2.0 * u);
    let curvature = |u: f64| (-2.0 * u).exp() + a * (2.0 * u).exp() * (4.0 + 4.0 * u);
    let value = |u: f64| 0.25 * (-2.0 * u).exp() + a * u * (2.0 * u).exp();

    if slope(0.0) >= 0.0 {
        return Ok(SingleModeOptimum {
            u_star: 0.0,
            t_star: 0.0,
            min_variance: 0.25,
            status: OptimumStatus::AtOrigin,
            within_validity,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while slope(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > super::EXP_CLAMP / 2.0 {
            return Err(Error::Singular("variance minimum beyond the exponent clamp"));
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = slope(u);
        if g < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - g / curvature(u);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let done = (next - u).abs() <= 1e-13 * u.max(1.0) || hi - lo <= 1e-13 * u.max(1.0);
        u = next;
        if done {
            break;
        }
    }
    Ok(SingleModeOptimum {
        u_star: u,
        t_star: u / (2.0 * coupling),
        min_variance: value(u),
        status: OptimumStatus::Interior,
        within_validity,
    })
}
