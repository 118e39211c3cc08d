//! Squeezing dynamics under cantilever phase noise.
//!
//! Single-mode: quadrature variance of one trapped molecule.
//! Two-mode: sum of the variances of the EPR-like quadratures of the ±k
//! phonon pair, whose drop below 2 witnesses entanglement.

mod cubic;
mod ode;
mod single_mode;
mod trace;
mod two_mode;

pub use cubic::{characteristic_coefficients, cubic_roots, cubic_roots_sq, CubicRoots};
pub use ode::{dormand_prince, laplace_ode_oracle, root_sum_kernel, OdeTolerance};
pub use single_mode::{
    optimal_single_mode_squeezing, single_mode_variance, OptimumStatus, SingleModeOptimum, SingleModePoint,
};
pub use trace::{single_mode_trace, two_mode_trace, Grid, GridAxis, TraceKind, TracePoint, VarianceTrace};
pub use two_mode::{
    c_k0, entanglement_window, root_sum_closed_form, two_mode_variance_sum, DampingRegime, EntanglementWindow,
    EvalPath, SqueezingRate, TwoModeEvaluator, TwoModePoint, WindowStatus,
};

use crate::error::{Error, Result};

/// Largest exponent magnitude evaluated before clamping.
pub const EXP_CLAMP: f64 = 700.0;

/// Single-mode variance of the vacuum, and the squeezing threshold.
pub const VACUUM_VARIANCE: f64 = 0.25;
/// Two-mode vacuum variance sum, and the inseparability threshold.
pub const VACUUM_VARIANCE_SUM: f64 = 2.0;

/// `exp(x)` with |x| capped at [`EXP_CLAMP`]; the flag reports a clamp.
pub(crate) fn clamped_exp(x: f64) -> (f64, bool) {
    if x > EXP_CLAMP {
        (EXP_CLAMP.exp(), true)
    } else if x < -EXP_CLAMP {
        ((-EXP_CLAMP).exp(), true)
    } else {
        (x.exp(), false)
    }
}

/// A point of evolution, given either as elapsed time or as squeezing
/// parameter u. The conversion rate depends on the formula: u = 2Ct for one
/// mode and u = 2C_k0·t for two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instant {
    Time(f64),
    Squeezing(f64),
}

impl Instant {
    /// Returns `(t, u)` given the rate `r` in u = r·t.
    pub(crate) fn resolve(self, rate: f64) -> Result<(f64, f64)> {
        let (t, u) = match self {
            Instant::Time(t) => (t, rate * t),
            Instant::Squeezing(u) => {
                if rate == 0.0 {
                    return Err(Error::Singular("squeezing parameter undefined for zero rate"));
                }
                (u / rate, u)
            }
        };
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::validation(format!("time must be finite and >= 0 (got {t})")));
        }
        Ok((t, u))
    }
}
