use std::f64::consts::PI;

use super::chain::{chain_hessian, ChainConfiguration};
use super::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::quantities::{phonon_frequency_scale, MoleculeSpecies, PhysicalConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeSpectrum {
    /// Ascending (rad/s).
    pub frequencies: Vec<f64>,
    /// Orthonormal displacement patterns, one per frequency.
    pub mode_vectors: Vec<Vec<f64>>,
    /// Wavenumber assigned from the central third of the chain (rad/m).
    pub effective_wavenumbers: Vec<f64>,
    /// Raw sign-change count over the central third, per mode.
    pub sign_changes: Vec<usize>,
    /// Share of each mode's weight inside the central third.
    pub central_weight: Vec<f64>,
    /// Spacing l used for the wavenumber assignment (m).
    pub central_spacing: f64,
}

/// Small-oscillation modes about an equilibrium: `ωₙ = sqrt(λₙ / m)` from
/// the Hessian, diagonalised by cyclic Jacobi.
pub fn hessian_modes(consts: &PhysicalConstants, config: &ChainConfiguration) -> Result<NormalModeSpectrum> {
    let h = chain_hessian(consts, &config.positions, &config.species, config.trap_omega)?;
    let dynamical = h / config.species.mass;
    let eig = jacobi_eigen(&dynamical)?;
    let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&neg) = eig.values.iter().find(|&&v| v < -1e-10 * largest) {
        return Err(Error::NotAMinimum { value: neg, largest });
    }
    let n = config.len();
    let l = config.central_spacing();
    let window = config.central_third();
    let mut frequencies = Vec::with_capacity(n);
    let mut mode_vectors = Vec::with_capacity(n);
    let mut effective_wavenumbers = Vec::with_capacity(n);
    let mut sign_changes = Vec::with_capacity(n);
    let mut central_weight = Vec::with_capacity(n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        let v: Vec<f64> = eig.vectors.column(i).iter().copied().collect();
        frequencies.push(lambda.max(0.0).sqrt());
        let (count, kl) = assign_wavenumber(&v[window.clone()]);
        sign_changes.push(count);
        effective_wavenumbers.push(if l > 0.0 { kl / l } else { 0.0 });
        central_weight.push(v[window.clone()].iter().map(|x| x * x).sum());
        mode_vectors.push(v);
    }
    Ok(NormalModeSpectrum {
        frequencies,
        mode_vectors,
        effective_wavenumbers,
        sign_changes,
        central_weight,
        central_spacing: l,
    })
}

/// Returns the sign-change count over `segment` and the dimensionless
/// wavenumber k·l.
///
/// The count fixes k·l to within π/(M−1). Inside that bracket the estimate
/// is refined with the standing-wave recurrence
/// `v_{i−1} + v_{i+1} = 2 cos(kl) v_i`, fitted by least squares.
fn assign_wavenumber(segment: &[f64]) -> (usize, f64) {
    let m = segment.len();
    if m < 2 {
        return (0, 0.0);
    }
    let count = segment.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let bonds = (m - 1) as f64;
    let coarse = PI * count as f64 / bonds;
    if m < 3 {
        return (count, coarse);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..m - 1 {
        num += segment[i] * (segment[i - 1] + segment[i + 1]);
        den += 2.0 * segment[i] * segment[i];
    }
    if den == 0.0 {
        return (count, coarse);
    }
    let fitted = (num / den).clamp(-1.0, 1.0).acos();
    let bracket = PI / bonds;
    let kl = if (fitted - coarse).abs() <= bracket { fitted } else { coarse };
    (count, kl)
}

/// Dispersion of an infinite chain with every dipole pair coupled:
/// `ω² = (24 K / m l⁵) Σₙ (1 − cos nkl)/n⁵`, K = d_m²/(4π ε₀).
pub fn lattice_sum_dispersion(consts: &PhysicalConstants, species: &MoleculeSpecies, spacing: f64, k: f64) -> f64 {
    let kd = consts.dipole_prefactor(species.dipole, species.dipole);
    let kl = k * spacing;
    let series: f64 = (1..=20_000).rev().map(|n| (1.0 - (n as f64 * kl).cos()) / (n as f64).powi(5)).sum();
    (24.0 * kd / (species.mass * spacing.powi(5)) * series).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeComparison {
    pub index: usize,
    pub omega_numeric: f64,
    pub k_eff: f64,
    /// `2 ω₀ |sin(k l / 2)|`.
    pub omega_formula: f64,
    pub rel_error: f64,
    /// All-pairs infinite-chain value at the same k.
    pub omega_lattice_sum: f64,
    pub rel_error_lattice_sum: f64,
    /// False for edge-localised or k ≈ 0 modes.
    pub included: bool,
    /// k l ≥ π/2.
    pub upper_half: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport {
    pub spacing: f64,
    pub omega0: f64,
    pub modes: Vec<ModeComparison>,
}

impl DispersionReport {
    fn upper(&self) -> impl Iterator<Item = &ModeComparison> {
        self.modes.iter().filter(|m| m.included && m.upper_half)
    }

    /// Largest relative error against `2 ω₀ |sin(kl/2)|` over included
    /// upper-half modes.
    pub fn max_upper_error(&self) -> f64 {
        self.upper().map(|m| m.rel_error).fold(0.0, f64::max)
    }

    pub fn max_upper_error_lattice_sum(&self) -> f64 {
        self.upper().map(|m| m.rel_error_lattice_sum).fold(0.0, f64::max)
    }

    pub fn upper_count(&self) -> usize {
        self.upper().count()
    }
}

/// Compares chain modes with the analytic dispersion, using the central
/// spacing as l.
pub fn dispersion_compare(consts: &PhysicalConstants, spectrum: &NormalModeSpectrum, config: &ChainConfiguration) -> DispersionReport {
    let l = spectrum.central_spacing;
    let omega0 = phonon_frequency_scale(consts, &config.species, l);
    let n = config.len();
    let window = config.central_third();
    let fair_share = window.len() as f64 / n as f64;
    let modes = spectrum
        .frequencies
        .iter()
        .enumerate()
        .map(|(index, &omega_numeric)| {
            let k_eff = spectrum.effective_wavenumbers[index];
            let kl = k_eff * l;
            let omega_formula = 2.0 * omega0 * (0.5 * kl).sin().abs();
            let omega_lattice_sum = lattice_sum_dispersion(consts, &config.species, l, k_eff);
            let rel = |reference: f64| {
                if reference > 0.0 {
                    (omega_numeric - reference).abs() / reference
                } else {
                    f64::INFINITY
                }
            };
            ModeComparison {
                index,
                omega_numeric,
                k_eff,
                omega_formula,
                rel_error: rel(omega_formula),
                omega_lattice_sum,
                rel_error_lattice_sum: rel(omega_lattice_sum),
                included: kl > 0.0 && spectrum.central_weight[index] >= 0.5 * fair_share,
                upper_half: kl >= 0.5 * PI,
            }
        })
        .collect();
    DispersionReport { spacing: l, omega0, modes }
}
