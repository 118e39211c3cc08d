use num_complex::Complex64;

use super::cubic::{cubic_roots_sq, CubicRoots};
use super::ode::root_sum_kernel;
use super::{clamped_exp, Instant, EXP_CLAMP, VACUUM_VARIANCE_SUM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingRegime {
    /// D < 2|C_k|: real C_k0, hyperbolic growth.
    Underdamped,
    /// D = 2|C_k|: C_k0 = 0, branch point.
    Critical,
    /// D > 2|C_k|: imaginary C_k0.
    Overdamped,
}

/// `C_k0 = ½ sqrt(4C_k² − D²)`, possibly imaginary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingRate {
    /// C_k0², negative when overdamped.
    pub squared: f64,
    pub value: Complex64,
    pub regime: DampingRegime,
}

impl SqueezingRate {
    /// Real part of C_k0.
    pub fn real(&self) -> f64 {
        self.value.re
    }
}

pub fn c_k0(c_k: f64, damping: f64) -> Result<SqueezingRate> {
    if !(c_k.is_finite() && c_k != 0.0) {
        return Err(Error::validation(format!("C_k must be finite and non-zero (got {c_k})")));
    }
    if !(damping.is_finite() && damping >= 0.0) {
        return Err(Error::validation(format!("damping must be finite and >= 0 (got {damping})")));
    }
    let mut squared = c_k * c_k - 0.25 * damping * damping;
    // Only round-off in the difference counts as critical: the sum varies
    // like C_k0 near the branch point, so a wider snap would show as a jump.
    let regime = if squared.abs() <= 4.0 * f64::EPSILON * c_k * c_k {
        squared = 0.0;
        DampingRegime::Critical
    } else if squared > 0.0 {
        DampingRegime::Underdamped
    } else {
        DampingRegime::Overdamped
    };
    let value = if squared >= 0.0 {
        Complex64::new(squared.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-squared).sqrt())
    };
    Ok(SqueezingRate { squared, value, regime })
}

/// Which route produced a two-mode value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    ClosedForm,
    OdeOracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModePoint {
    pub t: f64,
    /// u = 2C_k0·t; NaN at the critical point where it is undefined.
    pub u: f64,
    pub sum: f64,
    pub path: EvalPath,
    pub clamped: bool,
}

/// `Σᵢ e^{λᵢt}·2C_k0(λᵢ+4D)/∏_{j≠i}(λᵢ−λⱼ)` in complex arithmetic.
///
/// Symmetric in the order of `roots`. The flag reports a clamped exponent.
pub fn root_sum_closed_form(roots: &[Complex64; 3], damping: f64, c0: f64, t: f64) -> (Complex64, bool) {
    let mut total = Complex64::new(0.0, 0.0);
    let mut clamped = false;
    for i in 0..3 {
        let li = roots[i];
        let mut denom = Complex64::new(1.0, 0.0);
        for (j, &lj) in roots.iter().enumerate() {
            if j != i {
                denom *= li - lj;
            }
        }
        let z = li * t;
        let (mag, c) = clamped_exp(z.re);
        clamped |= c;
        let e = Complex64::from_polar(mag, z.im);
        total += e * (2.0 * c0) * (li + 4.0 * damping) / denom;
    }
    (total, clamped)
}

/// `e^{−Dt/2}·(D sinh(C_k0 t)/C_k0 + 2 cosh(C_k0 t))`, continued analytically
/// through C_k0² ≤ 0.
fn hyperbolic_term(damping: f64, c0_sq: f64, t: f64) -> (f64, bool) {
    let (decay, c1) = clamped_exp(-0.5 * damping * t);
    let (sinhc, cosh, c2) = if c0_sq > 0.0 {
        let c0 = c0_sq.sqrt();
        let x = c0 * t;
        if x > EXP_CLAMP {
            let (big, _) = clamped_exp(x);
            (0.5 * big / c0, 0.5 * big, true)
        } else {
            (x.sinh() / c0, x.cosh(), false)
        }
    } else if c0_sq < 0.0 {
        let w = (-c0_sq).sqrt();
        ((w * t).sin() / w, (w * t).cos(), false)
    } else {
        (t, 1.0, false)
    };
    (decay * (damping * sinhc + 2.0 * cosh), c1 || c2)
}

/// Variance sum with the two growing exponentials grouped, for 0 ≤ D ≤ C_k0.
///
/// The hyperbolic term carries `(1 + D/2C_k0)·e^{(C_k0 − D/2)t}` and the
/// residue sum carries `A₁e^{λ₁t}` with λ₁ = C_k0 + ε the positive root. Both
/// grow like e^{C_k0 t} while their difference does not (exactly so at
/// D = 0), so they are combined as
/// `e^{(C_k0 − D/2)t}·[(B₊ − A₁) − A₁·expm1((ε + D/2)t)]`, with ε taken from
/// the cubic shifted to C_k0 and B₊ − A₁ expanded in D and ε.
fn grouped_sum(roots: &[Complex64; 3], damping: f64, c0: f64, t: f64) -> (f64, f64, bool) {
    let d = damping;
    let top = (0..3)
        .filter(|&i| roots[i].im == 0.0)
        .max_by(|&a, &b| roots[a].re.total_cmp(&roots[b].re))
        .expect("cubic has a real root");
    // p(c0 + ε) = ε³ + b2 ε² + b1 ε + b0
    let b2 = 3.0 * c0 + 5.0 * d;
    let b1 = 2.0 * c0 * c0 + 10.0 * d * c0 + 4.0 * d * d;
    let b0 = 3.0 * d * c0 * c0 + 4.0 * d * d * c0;
    let mut eps = roots[top].re - c0;
    for _ in 0..8 {
        let q = ((eps + b2) * eps + b1) * eps + b0;
        let dq = (3.0 * eps + 2.0 * b2) * eps + b1;
        let step = q / dq;
        if !step.is_finite() {
            break;
        }
        eps -= step;
        if step.abs() <= f64::EPSILON * eps.abs() {
            break;
        }
    }
    let lambda1 = c0 + eps;
    let dp1 = (3.0 * eps + 2.0 * b2) * eps + b1;
    let a1 = 2.0 * c0 * (lambda1 + 4.0 * d) / dp1;
    let numerator = -2.0 * d * d * d / c0 - 9.0 * d * d - 5.0 * d * d * eps / c0 - 3.0 * d * c0 - 13.0 * d * eps
        - 1.5 * d * eps * eps / c0
        - 4.0 * c0 * eps
        - 3.0 * eps * eps;
    let b_minus_a = -numerator / dp1;
    let (grow, c1) = clamped_exp((c0 - 0.5 * d) * t);
    let growing = grow * (b_minus_a - a1 * ((eps + 0.5 * d) * t).exp_m1());

    let (decay, c2) = clamped_exp(-(c0 + 0.5 * d) * t);
    let mut rest = Complex64::new((1.0 - 0.5 * d / c0) * decay, 0.0);
    let mut clamped = c1 || c2;
    for i in (0..3).filter(|&i| i != top) {
        let li = roots[i];
        let mut denom = Complex64::new(1.0, 0.0);
        for (j, &lj) in roots.iter().enumerate() {
            if j != i {
                denom *= li - if j == top { Complex64::new(lambda1, 0.0) } else { lj };
            }
        }
        let z = li * t;
        let (mag, c) = clamped_exp(z.re);
        clamped |= c;
        rest -= Complex64::from_polar(mag, z.im) * (2.0 * c0) * (li + 4.0 * d) / denom;
    }
    (growing + rest.re, rest.im, clamped)
}

/// Evaluates the two-mode variance sum for fixed (C_k, D).
#[derive(Debug, Clone)]
pub struct TwoModeEvaluator {
    pub c_k: f64,
    pub damping: f64,
    pub rate: SqueezingRate,
    pub roots: CubicRoots,
    pub path: EvalPath,
}

impl TwoModeEvaluator {
    pub fn new(c_k: f64, damping: f64) -> Result<Self> {
        let rate = c_k0(c_k, damping)?;
        if rate.regime == DampingRegime::Overdamped {
            return Err(Error::Overdamped { damping, threshold: 2.0 * c_k.abs() });
        }
        let roots = cubic_roots_sq(damping, rate.squared);
        let path = if rate.regime == DampingRegime::Underdamped && !roots.is_degenerate {
            EvalPath::ClosedForm
        } else {
            EvalPath::OdeOracle
        };
        Ok(TwoModeEvaluator { c_k, damping, rate, roots, path })
    }

    /// Same as [`TwoModeEvaluator::new`] but always uses the ODE route.
    pub fn with_oracle(c_k: f64, damping: f64) -> Result<Self> {
        let mut ev = Self::new(c_k, damping)?;
        ev.path = EvalPath::OdeOracle;
        Ok(ev)
    }

    /// The rate r in u = r·t.
    pub fn u_rate(&self) -> f64 {
        2.0 * self.rate.real()
    }

    pub fn at(&self, at: Instant) -> Result<TwoModePoint> {
        let (t, u) = self.resolve(at)?;
        Ok(self.at_times(&[t])?.pop().map(|p| TwoModePoint { u, ..p }).expect("one point"))
    }

    fn resolve(&self, at: Instant) -> Result<(f64, f64)> {
        match at {
            Instant::Time(t) if self.rate.regime == DampingRegime::Critical => {
                Instant::Time(t).resolve(0.0).map(|(t, _)| (t, f64::NAN))
            }
            other => other.resolve(self.u_rate()),
        }
    }

    /// Values at ascending times; the ODE route integrates once across all of them.
    pub fn at_times(&self, times: &[f64]) -> Result<Vec<TwoModePoint>> {
        for &t in times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::validation(format!("time must be finite and >= 0 (got {t})")));
            }
        }
        let c0 = self.rate.real();
        let u_of = |t: f64| {
            if self.rate.regime == DampingRegime::Critical {
                f64::NAN
            } else {
                2.0 * c0 * t
            }
        };
        match self.path {
            EvalPath::ClosedForm => times
                .iter()
                .map(|&t| {
                    let (real, imag, clamped) = if self.damping <= c0 {
                        grouped_sum(&self.roots.lambda, self.damping, c0, t)
                    } else {
                        let (first, c1) = hyperbolic_term(self.damping, self.rate.squared, t);
                        let (rs, c2) = root_sum_closed_form(&self.roots.lambda, self.damping, c0, t);
                        (first - rs.re, -rs.im, c1 || c2)
                    };
                    if imag.abs() > 1e-9 * real.abs().max(f64::MIN_POSITIVE) {
                        return Err(Error::ImaginaryResidue { residue: imag, real });
                    }
                    Ok(TwoModePoint { t, u: u_of(t), sum: real, path: EvalPath::ClosedForm, clamped })
                })
                .collect(),
            EvalPath::OdeOracle => {
                let mut order: Vec<usize> = (0..times.len()).collect();
                order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
                let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
                let kernel = root_sum_kernel(self.damping, self.rate.squared, &sorted)?;
                let mut out = vec![None; times.len()];
                for (&i, z) in order.iter().zip(kernel) {
                    let t = times[i];
                    let (first, clamped) = hyperbolic_term(self.damping, self.rate.squared, t);
                    let sum = first - 2.0 * c0 * z;
                    out[i] = Some(TwoModePoint { t, u: u_of(t), sum, path: EvalPath::OdeOracle, clamped });
                }
                Ok(out.into_iter().map(|p| p.expect("filled")).collect())
            }
        }
    }
}

/// `(Δs₁)² + (Δs₂)²` at one instant; u = 2C_k0·t.
pub fn two_mode_variance_sum(c_k: f64, damping: f64, at: Instant) -> Result<TwoModePoint> {
    TwoModeEvaluator::new(c_k, damping)?.at(at)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowStatus {
    /// Sum below 2 on (t_enter, t_exit).
    Bounded,
    /// Sum stays below 2 past the search horizon.
    OpenEnded,
    /// Sum never below 2, or no real value (overdamped).
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementWindow {
    pub status: WindowStatus,
    pub t_enter: Option<f64>,
    pub t_exit: Option<f64>,
    /// Whether the emptiness comes from the overdamped regime.
    pub overdamped: bool,
}

const WINDOW_SCAN_POINTS: usize = 4000;
const WINDOW_HORIZON_U: f64 = 60.0;

/// First interval on which the variance sum is below 2.
///
/// Scans a grid out to u = 60 (or the equivalent in damping times at the
/// critical point) and refines each crossing by bisection.
pub fn entanglement_window(c_k: f64, damping: f64) -> Result<EntanglementWindow> {
    let ev = match TwoModeEvaluator::new(c_k, damping) {
        Ok(ev) => ev,
        Err(Error::Overdamped { .. }) => {
            return Ok(EntanglementWindow { status: WindowStatus::Empty, t_enter: None, t_exit: None, overdamped: true })
        }
        Err(e) => return Err(e),
    };
    let scale = ev.u_rate().max(0.5 * damping);
    let horizon = WINDOW_HORIZON_U / scale;
    let times: Vec<f64> = (0..=WINDOW_SCAN_POINTS).map(|i| horizon * i as f64 / WINDOW_SCAN_POINTS as f64).collect();
    let values: Vec<f64> = ev.at_times(&times)?.iter().map(|p| p.sum - VACUUM_VARIANCE_SUM).collect();

    let excess = |t: f64| -> Result<f64> { Ok(ev.at(Instant::Time(t))?.sum - VACUUM_VARIANCE_SUM) };
    let bisect = |mut lo: f64, mut hi: f64, below_at_lo: bool| -> Result<f64> {
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if (excess(mid)? < 0.0) == below_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let Some(first_below) = values.iter().skip(1).position(|&v| v < 0.0).map(|i| i + 1) else {
        return Ok(EntanglementWindow { status: WindowStatus::Empty, t_enter: None, t_exit: None, overdamped: false });
    };
    let t_enter = if first_below == 1 { 0.0 } else { bisect(times[first_below - 1], times[first_below], false)? };
    let exit = values[first_below..].iter().position(|&v| v >= 0.0).map(|i| i + first_below);
    match exit {
        Some(j) => {
            let t_exit = bisect(times[j - 1], times[j], true)?;
            Ok(EntanglementWindow {
                status: WindowStatus::Bounded,
                t_enter: Some(t_enter),
                t_exit: Some(t_exit),
                overdamped: false,
            })
        }
        None => Ok(EntanglementWindow {
            status: WindowStatus::OpenEnded,
            t_enter: Some(t_enter),
            t_exit: None,
            overdamped: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_cases() {
        let r = c_k0(6.2, 0.0).unwrap();
        assert_eq!(r.real(), 6.2);
        let r = c_k0(-6.2, 12.4).unwrap();
        assert_eq!(r.regime, DampingRegime::Critical);
        assert_eq!(r.real(), 0.0);
        let r = c_k0(6.2, 1.0).unwrap();
        // Cross-check by squaring.
        assert!((4.0 * r.real() * r.real() - (4.0 * 6.2 * 6.2 - 1.0)).abs() < 1e-12);
        assert!((r.real() - 6.179_805_822_192_151).abs() < 1e-12);
        let r = c_k0(1.0, 3.0).unwrap();
        assert_eq!(r.regime, DampingRegime::Overdamped);
        assert!(r.value.re == 0.0 && r.value.im > 0.0);
        assert!(c_k0(0.0, 1.0).is_err());
    }

    #[test]
    fn vacuum_at_origin() {
        let p = two_mode_variance_sum(6.2, 1.0, Instant::Time(0.0)).unwrap();
        assert!((p.sum - 2.0).abs() < 1e-12);
        assert_eq!(p.path, EvalPath::ClosedForm);
    }

    #[test]
    fn undamped_closed_form() {
        for &t in &[0.01, 0.1, 0.3] {
            let p = two_mode_variance_sum(6.2, 0.0, Instant::Time(t)).unwrap();
            let expected = 2.0 * (-6.2 * t).exp();
            assert!((p.sum - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn grouping_matches_plain_residue_sum() {
        for &(c_k, d) in &[(6.2, 0.0), (6.2, 1.0), (3.0, 2.5), (40.0, 0.01)] {
            let ev = TwoModeEvaluator::new(c_k, d).unwrap();
            let c0 = ev.rate.real();
            for u in [0.0, 0.3, 1.0, 2.5] {
                let t = u / (2.0 * c0);
                let (first, _) = hyperbolic_term(d, ev.rate.squared, t);
                let (rs, _) = root_sum_closed_form(&ev.roots.lambda, d, c0, t);
                let (grouped, imag, _) = grouped_sum(&ev.roots.lambda, d, c0, t);
                let plain = first - rs.re;
                assert!((grouped - plain).abs() < 1e-12 * plain.abs().max(1.0), "{c_k} {d} {u}");
                assert!(imag.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn undamped_far_tail_keeps_relative_accuracy() {
        let p = two_mode_variance_sum(6.2, 0.0, Instant::Squeezing(40.0)).unwrap();
        let expected = 2.0 * (-20.0f64).exp();
        assert!((p.sum - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn critical_uses_oracle_and_matches_limit() {
        let p = two_mode_variance_sum(2.0, 4.0, Instant::Time(0.3)).unwrap();
        assert_eq!(p.path, EvalPath::OdeOracle);
        assert!(p.u.is_nan());
        let expected = (-0.6f64).exp() * (4.0 * 0.3 + 2.0);
        assert!((p.sum - expected).abs() < 1e-12);
    }

    #[test]
    fn overdamped_is_an_error() {
        assert!(matches!(two_mode_variance_sum(1.0, 3.0, Instant::Time(0.1)), Err(Error::Overdamped { .. })));
    }

    #[test]
    fn window_undamped_is_open() {
        let w = entanglement_window(6.2, 0.0).unwrap();
        assert_eq!(w.status, WindowStatus::OpenEnded);
        assert_eq!(w.t_enter, Some(0.0));
    }

    #[test]
    fn window_reference_parameters_is_bounded() {
        let w = entanglement_window(6.2, 1.0).unwrap();
        assert_eq!(w.status, WindowStatus::Bounded);
        let t_exit = w.t_exit.unwrap();
        let p = two_mode_variance_sum(6.2, 1.0, Instant::Time(t_exit)).unwrap();
        assert!((p.sum - 2.0).abs() < 1e-6);
    }

    #[test]
    fn window_overdamped_is_empty() {
        let w = entanglement_window(1.0, 50.0).unwrap();
        assert_eq!(w.status, WindowStatus::Empty);
        assert!(w.overdamped);
    }
}
