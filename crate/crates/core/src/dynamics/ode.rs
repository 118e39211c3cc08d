//! Adaptive Dormand–Prince 5(4) integration and the ODE route to the
//! root-sum term of the two-mode variance.
//!
//! The root-sum `Σᵢ e^{λᵢt}·2C_k0(λᵢ+4D)/∏_{j≠i}(λᵢ−λⱼ)` is the inverse
//! Laplace transform of `2C_k0(s+4D)/p(s)`, with p the characteristic cubic.
//! It therefore solves `y‴ + 5D y″ + (4D²−C_k0²) y′ − 2C_k0²D y = 0` with
//! `y(0) = 0`, `y′(0) = 2C_k0`, `y″(0) = −2C_k0·D`, and stays regular when
//! roots coincide.

use super::cubic::characteristic_coefficients;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { rtol: 1e-10, atol: 1e-14, max_steps: 1_000_000 }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `y′ = f(t, y)` from `t0`, returning the state at each entry of
/// `outputs` (ascending, all ≥ `t0`). Steps are shortened to land exactly on
/// every output time.
pub fn dormand_prince<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    tol: OdeTolerance,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = outputs.last().map_or(1.0, |&end| (end - t0).abs() * 1e-3).max(1e-12);
    let mut out = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;

    for &target in outputs {
        if target < t {
            return Err(Error::StepControl { t, reason: "output times must be ascending" });
        }
        while t < target {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::StepControl { t, reason: "step budget exhausted" });
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };

            let k2 = f(t + C2 * step, &axpy(&y, &[(step * A21, &k1)]));
            let k3 = f(t + C3 * step, &axpy(&y, &[(step * A31, &k1), (step * A32, &k2)]));
            let k4 = f(t + C4 * step, &axpy(&y, &[(step * A41, &k1), (step * A42, &k2), (step * A43, &k3)]));
            let k5 = f(
                t + C5 * step,
                &axpy(&y, &[(step * A51, &k1), (step * A52, &k2), (step * A53, &k3), (step * A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &axpy(
                    &y,
                    &[(step * A61, &k1), (step * A62, &k2), (step * A63, &k3), (step * A64, &k4), (step * A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                &[(step * B1, &k1), (step * B3, &k3), (step * B4, &k4), (step * B5, &k5), (step * B6, &k6)],
            );
            let k7 = f(t + step, &y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::StepControl { t, reason: "non-finite error estimate" });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // Keep h from collapsing because a step was clipped to an output.
            h = if last && err <= 1.0 { h.max(step * factor) } else { step * factor };
            if h < 1e-14 * t.abs().max(1e-300) {
                return Err(Error::StepControl { t, reason: "step size underflow" });
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Root-sum divided by 2C_k0, at each time in `times` (ascending).
///
/// Real for every sign of C_k0², including the overdamped branch.
pub fn root_sum_kernel(damping: f64, c0_sq: f64, times: &[f64]) -> Result<Vec<f64>> {
    let [a2, a1, a0] = characteristic_coefficients(damping, c0_sq);
    let rhs = |_t: f64, y: &[f64; 3]| [y[1], y[2], -a2 * y[2] - a1 * y[1] - a0 * y[0]];
    let states = dormand_prince(rhs, 0.0, [0.0, 1.0, -damping], times, OdeTolerance::default())?;
    Ok(states.into_iter().map(|s| s[0]).collect())
}

/// Root-sum term `y(t)` of the two-mode variance sum, from the ODE.
pub fn laplace_ode_oracle(damping: f64, c_k0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::validation(format!("time must be finite and >= 0 (got {t})")));
    }
    Ok(2.0 * c_k0 * root_sum_kernel(damping, c_k0 * c_k0, &[t])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times = [0.5, 1.0, 2.0];
        let ys = dormand_prince(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], &times, OdeTolerance::default()).unwrap();
        for (t, y) in times.iter().zip(ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10 * (-t).exp());
        }
    }

    #[test]
    fn harmonic_oscillator_phase() {
        let ys = dormand_prince(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &[10.0],
            OdeTolerance::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 10f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn initial_condition_is_zero() {
        assert_eq!(laplace_ode_oracle(1.0, 6.18, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn undamped_is_twice_sinh() {
        let c0 = 6.2;
        for &t in &[0.05, 0.2, 0.5] {
            let y = laplace_ode_oracle(0.0, c0, t).unwrap();
            let expected = 2.0 * (c0 * t).sinh();
            assert!((y - expected).abs() < 1e-9 * expected, "t={t}: {y} vs {expected}");
        }
    }

    #[test]
    fn taylor_match_to_second_order() {
        // y ≈ 2C₀t − C₀D t² for small t
        let (d, c0) = (1.0, 6.18);
        let t = 1e-4;
        let y = laplace_ode_oracle(d, c0, t).unwrap();
        let series = 2.0 * c0 * t - c0 * d * t * t;
        assert!((y - series).abs() < 1e-10);
    }

    #[test]
    fn rejects_descending_outputs() {
        assert!(root_sum_kernel(1.0, 1.0, &[1.0, 0.5]).is_err());
    }
}
