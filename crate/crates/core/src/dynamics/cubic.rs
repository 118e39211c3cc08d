use nalgebra::{Matrix3, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots of `λ³ + 5Dλ² + (4D² − C_k0²)λ − 2C_k0²D = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    /// Sorted by real part, then imaginary part.
    pub lambda: [Complex64; 3],
    pub is_degenerate: bool,
    /// max |p(λᵢ)| divided by the cube of the coefficient scale.
    pub residual: f64,
}

/// Monic coefficients `[a₂, a₁, a₀]`. Only C_k0² enters, so overdamped
/// (negative) values are allowed.
pub fn characteristic_coefficients(damping: f64, c0_sq: f64) -> [f64; 3] {
    [5.0 * damping, 4.0 * damping * damping - c0_sq, -2.0 * c0_sq * damping]
}

pub fn cubic_roots(damping: f64, c_k0: f64) -> Result<CubicRoots> {
    if !(damping >= 0.0 && c_k0 > 0.0) {
        return Err(Error::validation(format!(
            "cubic needs D >= 0 and C_k0 > 0 (got D = {damping}, C_k0 = {c_k0})"
        )));
    }
    Ok(cubic_roots_sq(damping, c_k0 * c_k0))
}

fn eval(coef: &[f64; 3], z: Complex64) -> (Complex64, Complex64) {
    let [a2, a1, a0] = *coef;
    let p = ((z + a2) * z + a1) * z + a0;
    let dp = (3.0 * z + 2.0 * a2) * z + a1;
    (p, dp)
}

/// Companion-matrix eigenvalues, each polished by one Newton step.
pub fn cubic_roots_sq(damping: f64, c0_sq: f64) -> CubicRoots {
    let coef = characteristic_coefficients(damping, c0_sq);
    let [a2, a1, a0] = coef;
    #[rustfmt::skip]
    let companion = Matrix3::new(
        -a2, -a1, -a0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
    );
    let scale = damping.abs().max(c0_sq.abs().sqrt()).max(f64::MIN_POSITIVE);

    let zero = Complex64::new(0.0, 0.0);
    let mut lambda = if coef.iter().all(|&c| c == 0.0) {
        [zero; 3]
    } else {
        match Schur::try_new(companion, f64::EPSILON, 10_000) {
            Some(schur) => {
                let eig = schur.complex_eigenvalues();
                [eig[0], eig[1], eig[2]]
            }
            None => [zero; 3],
        }
    };
    for z in lambda.iter_mut() {
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
        let (p, dp) = eval(&coef, *z);
        if dp.norm() > 0.0 {
            let step = p / dp;
            if step.is_finite() {
                *z -= step;
            }
        }
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
    }
    // Real coefficients: complex roots come as an exact conjugate pair.
    lambda.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for i in 0..2 {
        let (a, b) = (lambda[i], lambda[i + 1]);
        if a.im != 0.0 && b.im != 0.0 && (a.im + b.im).abs() <= 1e-8 * a.im.abs() {
            let re = 0.5 * (a.re + b.re);
            let im = 0.5 * (b.im - a.im).abs();
            lambda[i] = Complex64::new(re, -im);
            lambda[i + 1] = Complex64::new(re, im);
        }
    }

    let residual = lambda.iter().map(|&z| eval(&coef, z).0.norm()).fold(0.0, f64::max) / scale.powi(3);
    let largest = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut closest = f64::INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            closest = closest.min((lambda[i] - lambda[j]).norm());
        }
    }
    let is_degenerate = largest == 0.0 || closest < 1e-8 * largest;
    CubicRoots { lambda, is_degenerate, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: trigonometric / Cardano closed form for the
    /// depressed cubic.
    fn cardano(a2: f64, a1: f64, a0: f64) -> Vec<Complex64> {
        let p = a1 - a2 * a2 / 3.0;
        let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
        let shift = -a2 / 3.0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc < 0.0 {
            let r = (-p / 3.0).sqrt();
            let phi = (-q / (2.0 * r.powi(3))).clamp(-1.0, 1.0).acos();
            (0..3)
                .map(|k| {
                    let x = 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
                    Complex64::new(x + shift, 0.0)
                })
                .collect()
        } else {
            let s = disc.sqrt();
            let u = (-q / 2.0 + s).cbrt();
            let v = (-q / 2.0 - s).cbrt();
            let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
            vec![
                Complex64::new(u + v + shift, 0.0),
                w * u + w.conj() * v + shift,
                w.conj() * u + w * v + shift,
            ]
        }
    }

    fn matches(a: &[Complex64; 3], b: &[Complex64], tol: f64) -> bool {
        b.iter().all(|z| a.iter().any(|w| (w - z).norm() <= tol))
    }

    #[test]
    fn undamped_roots() {
        let r = cubic_roots(0.0, 6.2).unwrap();
        let expected = [Complex64::new(-6.2, 0.0), Complex64::new(0.0, 0.0), Complex64::new(6.2, 0.0)];
        for (a, b) in r.lambda.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(!r.is_degenerate);
    }

    #[test]
    fn reference_parameters_against_cardano() {
        let c0 = 0.5 * (4.0 * 6.2f64 * 6.2 - 1.0).sqrt();
        let r = cubic_roots(1.0, c0).unwrap();
        let [a2, a1, a0] = characteristic_coefficients(1.0, c0 * c0);
        assert!(matches(&r.lambda, &cardano(a2, a1, a0), 1e-10));
        assert!(r.residual < 1e-9);
        let sum: Complex64 = r.lambda.iter().sum();
        assert!((sum.re + 5.0).abs() < 1e-12);
    }

    #[test]
    fn overdamped_coefficients_still_solve() {
        let r = cubic_roots_sq(3.0, -1.0);
        let [a2, a1, a0] = characteristic_coefficients(3.0, -1.0);
        assert!(matches(&r.lambda, &cardano(a2, a1, a0), 1e-9));
    }

    #[test]
    fn complex_pair_is_conjugate() {
        // λ³ + 5λ² + (4 + 30)λ + 60 has one real root and a complex pair.
        let r = cubic_roots_sq(1.0, -30.0);
        let complex: Vec<_> = r.lambda.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(complex.len(), 2);
        assert_eq!(complex[0].re, complex[1].re);
        assert_eq!(complex[0].im, -complex[1].im);
    }

    #[test]
    fn all_zero_is_degenerate() {
        assert!(cubic_roots_sq(0.0, 0.0).is_degenerate);
        assert!(cubic_roots(1.0, 0.0).is_err());
    }
}
