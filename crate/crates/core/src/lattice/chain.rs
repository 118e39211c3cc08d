use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantities::{check_positive, MoleculeSpecies, PhysicalConstants};

/// Chain energy and its gradient (N per coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEval {
    pub energy: f64,
    pub gradient: Vec<f64>,
}

/// `U = d_m²/(4π ε₀) Σ_{i<j} |xᵢ−xⱼ|⁻³ + ½ m ω_t² Σ xᵢ²`, all pairs summed.
pub fn chain_energy(
    consts: &PhysicalConstants,
    positions: &[f64],
    species: &MoleculeSpecies,
    trap_omega: f64,
) -> Result<EnergyEval> {
    let k = consts.dipole_prefactor(species.dipole, species.dipole);
    let spring = species.mass * trap_omega * trap_omega;
    let n = positions.len();
    let mut energy = 0.0;
    let mut gradient: Vec<f64> = positions.iter().map(|&x| spring * x).collect();
    for (i, &xi) in positions.iter().enumerate() {
        energy += 0.5 * spring * xi * xi;
        for j in i + 1..n {
            let dx = xi - positions[j];
            let r = dx.abs();
            if r == 0.0 {
                return Err(Error::Ordering(j));
            }
            energy += k / (r * r * r);
            let f = -3.0 * k * dx.signum() / (r * r * r * r);
            gradient[i] += f;
            gradient[j] -= f;
        }
    }
    Ok(EnergyEval { energy, gradient })
}

/// Analytic Hessian of [`chain_energy`] (N/m).
pub fn chain_hessian(
    consts: &PhysicalConstants,
    positions: &[f64],
    species: &MoleculeSpecies,
    trap_omega: f64,
) -> Result<DMatrix<f64>> {
    let k = consts.dipole_prefactor(species.dipole, species.dipole);
    Ok(scaled_hessian(positions, k, species.mass * trap_omega * trap_omega)?)
}

/// Hessian of `k Σ r⁻³ + ½ spring Σ x²`.
fn scaled_hessian(x: &[f64], k: f64, spring: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut h = DMatrix::from_diagonal_element(n, n, spring);
    for i in 0..n {
        for j in i + 1..n {
            let r = (x[i] - x[j]).abs();
            if r == 0.0 {
                return Err(Error::Ordering(j));
            }
            let c = 12.0 * k / r.powi(5);
            h[(i, i)] += c;
            h[(j, j)] += c;
            h[(i, j)] -= c;
            h[(j, i)] -= c;
        }
    }
    Ok(h)
}

/// Equilibrium spacing of two molecules, `(6 d_m²/(4π ε₀) / (m ω_t²))^{1/5}`.
pub fn pair_spacing(consts: &PhysicalConstants, species: &MoleculeSpecies, trap_omega: f64) -> f64 {
    let k = consts.dipole_prefactor(species.dipole, species.dipole);
    (6.0 * k / (species.mass * trap_omega * trap_omega)).powf(0.2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfiguration {
    /// Ascending positions (m).
    pub positions: Vec<f64>,
    pub species: MoleculeSpecies,
    pub trap_omega: f64,
    /// Largest residual force magnitude (N).
    pub gradient_norm: f64,
    /// Energy (J) after the initial scaling and each accepted Newton step.
    pub energy_history: Vec<f64>,
    pub iterations: usize,
}

impl ChainConfiguration {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.positions.len();
        if n < 2 {
            return 0.0;
        }
        (self.positions[n - 1] - self.positions[0]) / (n - 1) as f64
    }

    /// Spacing at the middle of the chain (mean of the two middle bonds for
    /// odd N).
    pub fn central_spacing(&self) -> f64 {
        let s = self.spacings();
        match s.len() {
            0 => 0.0,
            m if m % 2 == 1 => s[m / 2],
            m => 0.5 * (s[m / 2 - 1] + s[m / 2]),
        }
    }

    /// Index range of the central third of the chain.
    pub fn central_third(&self) -> std::ops::Range<usize> {
        let n = self.positions.len();
        let lo = n / 3;
        lo..(n - lo).max(lo + 1).min(n)
    }
}

const MAX_NEWTON_ITERATIONS: usize = 200;
const FORCE_TOLERANCE: f64 = 1e-12;
/// Relative energy change treated as round-off near the minimum.
const ROUND_OFF: f64 = 64.0 * f64::EPSILON;

/// Minimises the chain energy by damped Newton iteration.
///
/// Works in units of the two-molecule spacing s*, where the energy reads
/// `Σ r⁻³ + 3 Σ ξ²`. Start: uniform unit spacing rescaled by the exact
/// optimal global factor. Converged when the largest force is below
/// 1e-12 of the dipole force at the mean spacing. Accepted steps lower the
/// energy, except near the minimum where a full Newton step may change it
/// by round-off only (relative 64 ε).
pub fn equilibrium_positions(
    consts: &PhysicalConstants,
    n: usize,
    species: &MoleculeSpecies,
    trap_omega: f64,
) -> Result<ChainConfiguration> {
    if n == 0 {
        return Err(Error::validation("chain needs at least one molecule"));
    }
    check_positive("trap_omega", trap_omega)?;
    species.validate()?;
    let s_star = pair_spacing(consts, species, trap_omega);
    let k = consts.dipole_prefactor(species.dipole, species.dipole);
    let energy_unit = k / s_star.powi(3);
    let force_unit = k / s_star.powi(4);

    let energy = |x: &[f64]| -> f64 {
        let mut e = 3.0 * x.iter().map(|v| v * v).sum::<f64>();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                e += (x[j] - x[i]).abs().powi(-3);
            }
        }
        e
    };
    let gradient = |x: &[f64]| -> Vec<f64> {
        let mut g: Vec<f64> = x.iter().map(|v| 6.0 * v).collect();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let dx = x[i] - x[j];
                let f = -3.0 * dx.signum() / dx.abs().powi(4);
                g[i] += f;
                g[j] -= f;
            }
        }
        g
    };
    let ordered = |x: &[f64]| x.windows(2).all(|w| w[1] > w[0]);

    let centre = 0.5 * (n as f64 - 1.0);
    let mut x: Vec<f64> = (0..n).map(|i| i as f64 - centre).collect();
    if n > 1 {
        // E(a·x₀) = A a⁻³ + B a², minimised at a⁵ = 3A / 2B.
        let a_pair = energy(&x) - 3.0 * x.iter().map(|v| v * v).sum::<f64>();
        let b_trap = 3.0 * x.iter().map(|v| v * v).sum::<f64>();
        let a = (3.0 * a_pair / (2.0 * b_trap)).powf(0.2);
        x.iter_mut().for_each(|v| *v *= a);
    }

    let mut e = energy(&x);
    let mut history = vec![e * energy_unit];
    let mut g = gradient(&x);
    let mut iterations = 0;
    loop {
        let mean = if n > 1 { (x[n - 1] - x[0]) / (n - 1) as f64 } else { 1.0 };
        let tol = FORCE_TOLERANCE / mean.powi(4);
        let max_force = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_force < tol {
            break;
        }
        if iterations >= MAX_NEWTON_ITERATIONS {
            return Err(Error::NoConvergence { iterations, max_force: max_force * force_unit });
        }
        iterations += 1;
        let h = scaled_hessian(&x, 1.0, 6.0)?;
        let rhs = -DVector::from_column_slice(&g);
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => rhs.clone(),
        };
        let slope: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + alpha * si).collect();
            if ordered(&trial) {
                let et = energy(&trial);
                if et <= e + 1e-4 * alpha * slope {
                    accepted = Some((trial, et));
                    break;
                }
                // Energy differences at round-off level: accept a full step
                // that leaves the energy unchanged within round-off and
                // reduces the force.
                if alpha == 1.0 && et <= e + ROUND_OFF * e.abs() {
                    let gt = gradient(&trial);
                    if gt.iter().fold(0.0f64, |m, v| m.max(v.abs())) < max_force {
                        accepted = Some((trial, et));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, et)) = accepted else {
            return Err(Error::NoConvergence { iterations, max_force: max_force * force_unit });
        };
        x = trial;
        e = et;
        g = gradient(&x);
        history.push(e * energy_unit);
    }
    if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Ordering(i + 1));
    }
    let gradient_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs())) * force_unit;
    Ok(ChainConfiguration {
        positions: x.into_iter().map(|v| v * s_star).collect(),
        species: species.clone(),
        trap_omega,
        gradient_norm,
        energy_history: history,
        iterations,
    })
}

/// Trap frequency giving the requested spacing at the chain centre.
///
/// All lengths scale as ω_t^{-2/5}, so one solve at a reference trap fixes
/// the answer exactly.
pub fn trap_for_central_spacing(
    consts: &PhysicalConstants,
    n: usize,
    species: &MoleculeSpecies,
    target_spacing: f64,
) -> Result<f64> {
    check_positive("target spacing", target_spacing)?;
    if n < 2 {
        return Err(Error::validation("central spacing needs at least two molecules"));
    }
    let reference = 1.0e6;
    let cfg = equilibrium_positions(consts, n, species, reference)?;
    let ratio = cfg.central_spacing() / target_spacing;
    Ok(reference * ratio.powf(2.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SI: PhysicalConstants = PhysicalConstants::SI;

    #[test]
    fn single_molecule() {
        let sp = MoleculeSpecies::strontium_oxide();
        let e = chain_energy(&SI, &[0.0], &sp, 1e6).unwrap();
        assert_eq!(e.energy, 0.0);
        assert_eq!(e.gradient, vec![0.0]);
        let cfg = equilibrium_positions(&SI, 1, &sp, 1e6).unwrap();
        assert_eq!(cfg.positions, vec![0.0]);
    }

    #[test]
    fn pair_energy_closed_form() {
        let sp = MoleculeSpecies::strontium_oxide();
        let s = 3e-7;
        let w = 2e5;
        let e = chain_energy(&SI, &[-s / 2.0, s / 2.0], &sp, w).unwrap();
        let k = SI.dipole_prefactor(sp.dipole, sp.dipole);
        let expected = k / s.powi(3) + 0.25 * sp.mass * w * w * s * s;
        assert!((e.energy - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn coincident_positions_rejected() {
        let sp = MoleculeSpecies::strontium_oxide();
        assert!(matches!(chain_energy(&SI, &[1e-7, 1e-7], &sp, 1e6), Err(Error::Ordering(_))));
    }

    #[test]
    fn pair_spacing_matches_minimiser() {
        let sp = MoleculeSpecies::strontium_oxide();
        let cfg = equilibrium_positions(&SI, 2, &sp, 3e5).unwrap();
        let s = cfg.positions[1] - cfg.positions[0];
        let expected = pair_spacing(&SI, &sp, 3e5);
        assert!((s / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tuned_trap_hits_target_spacing() {
        let sp = MoleculeSpecies::strontium_oxide();
        let w = trap_for_central_spacing(&SI, 12, &sp, 200e-9).unwrap();
        let cfg = equilibrium_positions(&SI, 12, &sp, w).unwrap();
        assert!((cfg.central_spacing() / 200e-9 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn converges_for_every_length() {
        let sp = MoleculeSpecies::strontium_oxide();
        for n in 2..=80 {
            let c = equilibrium_positions(&SI, n, &sp, 1.0e6).unwrap();
            let h = &c.energy_history;
            assert!(h.windows(2).all(|w| w[1] <= w[0] + ROUND_OFF * w[0].abs()), "n = {n}");
        }
    }
}
