//! Physical parameters and the closed-form couplings between a dipole-tipped
//! cantilever and trapped polar molecules.
//!
//! Everything here is SI: frequencies are angular (rad/s), couplings and
//! damping rates are in 1/s, lengths in metres. A "MHz" figure in a worked
//! example is read as 10⁶ rad/s; [`mega_rad_per_s`] does that conversion.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One debye in C·m.
pub const DEBYE: f64 = 3.335_640_952e-30;
/// Unified atomic mass unit in kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Header line written into every report that carries frequencies.
pub const UNIT_CONVENTION: &str =
    "SI; frequencies angular in rad/s (1 MHz read as 1e6 rad/s); rates in 1/s";

/// Converts a value quoted in "MHz" into rad/s under the crate convention.
pub fn mega_rad_per_s(mhz: f64) -> f64 {
    mhz * 1.0e6
}

/// Fundamental constants used by every formula.
///
/// [`PhysicalConstants::SI`] holds the CODATA 2018 values. Other values are
/// only useful for unit-system checks in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub epsilon0: f64,
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        epsilon0: 8.854_187_812_8e-12,
        k_b: 1.380_649e-23,
    };

    pub fn new(hbar: f64, epsilon0: f64, k_b: f64) -> Result<Self> {
        if !(hbar > 0.0 && epsilon0 > 0.0 && k_b > 0.0) {
            return Err(Error::validation("physical constants must be strictly positive"));
        }
        Ok(PhysicalConstants { hbar, epsilon0, k_b })
    }

    /// Prefactor `d₁·d₂/(4π ε₀)` of the dipole–dipole energy.
    pub fn dipole_prefactor(&self, d1: f64, d2: f64) -> f64 {
        d1 * d2 / (4.0 * PI * self.epsilon0)
    }

    /// Zero-point amplitude `sqrt(ħ / 2mω)` of a harmonic mode.
    pub fn zero_point_length(&self, mass: f64, omega: f64) -> f64 {
        (self.hbar / (2.0 * mass * omega)).sqrt()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants::SI
    }
}

/// How the thermal occupation of the cantilever mode is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupation {
    /// Cantilever temperature in kelvin; N̄ is derived from it.
    Temperature(f64),
    /// Mean number of quanta given directly.
    Quanta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverParams {
    /// Mechanical angular frequency ω_c (rad/s).
    pub omega_c: f64,
    /// Effective mass m_c (kg).
    pub mass: f64,
    /// Damping rate D (1/s).
    pub damping: f64,
    /// Tip dipole moment d_c (C·m).
    pub dipole: f64,
    pub occupation: Occupation,
}

impl CantileverParams {
    pub fn new(omega_c: f64, mass: f64, damping: f64, dipole: f64, occupation: Occupation) -> Result<Self> {
        let c = CantileverParams { omega_c, mass, damping, dipole, occupation };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("cantilever.omega_c", self.omega_c)?;
        check_positive("cantilever.mass", self.mass)?;
        check_non_negative("cantilever.damping", self.damping)?;
        check_non_negative("cantilever.dipole", self.dipole)?;
        match self.occupation {
            Occupation::Temperature(t) => check_non_negative("cantilever.temperature", t),
            Occupation::Quanta(n) => check_non_negative("cantilever.occupation", n),
        }
    }

    /// Zero-point amplitude of the tip, `sqrt(ħ / 2 m_c ω_c)`.
    pub fn zero_point_length(&self, consts: &PhysicalConstants) -> f64 {
        consts.zero_point_length(self.mass, self.omega_c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpecies {
    pub name: String,
    /// Molecular mass (kg).
    pub mass: f64,
    /// Permanent dipole moment d_m (C·m).
    pub dipole: f64,
}

impl MoleculeSpecies {
    pub fn new(name: impl Into<String>, mass: f64, dipole: f64) -> Result<Self> {
        let s = MoleculeSpecies { name: name.into(), mass, dipole };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("species.mass", self.mass)?;
        check_positive("species.dipole", self.dipole)
    }

    /// SrO with d_m = 8.9 D and m = 103.62 u.
    pub fn strontium_oxide() -> Self {
        MoleculeSpecies {
            name: "SrO".to_string(),
            mass: 103.62 * ATOMIC_MASS_UNIT,
            dipole: 8.9 * DEBYE,
        }
    }
}

/// Outcome of a length-scale hierarchy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Validity {
    Valid,
    Marginal,
    Violated,
}

impl Validity {
    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Valid => "valid",
            Validity::Marginal => "marginal",
            Validity::Violated => "violated",
        }
    }
}

/// A single trapped molecule a distance R from the cantilever tip.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleMoleculeSetup {
    pub species: MoleculeSpecies,
    /// Bare trap frequency ω_t (rad/s).
    pub trap_omega: f64,
    /// Tip–molecule distance R (m).
    pub distance: f64,
}

impl SingleMoleculeSetup {
    pub fn new(species: MoleculeSpecies, trap_omega: f64, distance: f64) -> Result<Self> {
        let s = SingleMoleculeSetup { species, trap_omega, distance };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        check_non_negative("setup.trap_omega", self.trap_omega)?;
        check_positive("setup.distance", self.distance)
    }

    /// Ratio of R to the larger of the two zero-point amplitudes.
    pub fn hierarchy_ratio(&self, consts: &PhysicalConstants, cantilever: &CantileverParams) -> f64 {
        let omega_t = shifted_trap_frequency(consts, self, cantilever);
        let x_m = if omega_t > 0.0 {
            consts.zero_point_length(self.species.mass, omega_t)
        } else {
            f64::INFINITY
        };
        let x_c = cantilever.zero_point_length(consts);
        self.distance / x_m.max(x_c)
    }

    /// Valid when R exceeds both zero-point lengths by more than 100.
    pub fn hierarchy(&self, consts: &PhysicalConstants, cantilever: &CantileverParams) -> Validity {
        classify_large(self.hierarchy_ratio(consts, cantilever), 100.0, 10.0)
    }
}

/// A chain of `count` molecules with lattice spacing l, centred a distance
/// R from the tip.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSetup {
    pub species: MoleculeSpecies,
    /// Lattice spacing l (m).
    pub spacing: f64,
    pub count: usize,
    /// Tip–chain distance R (m).
    pub distance: f64,
    /// Longitudinal trap frequency (rad/s), used by the numerical lattice.
    pub trap_omega: f64,
}

impl CrystalSetup {
    pub fn new(species: MoleculeSpecies, spacing: f64, count: usize, distance: f64, trap_omega: f64) -> Result<Self> {
        let c = CrystalSetup { species, spacing, count, distance, trap_omega };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        check_positive("setup.spacing", self.spacing)?;
        if self.count < 2 {
            return Err(Error::validation("setup.count must be at least 2"));
        }
        check_positive("setup.distance", self.distance)?;
        check_non_negative("setup.trap_omega", self.trap_omega)
    }

    /// Brillouin-zone edge π/l.
    pub fn zone_edge(&self) -> f64 {
        PI / self.spacing
    }

    /// N·l/R; must be small for the collective coupling picture.
    pub fn extent_ratio(&self) -> f64 {
        self.count as f64 * self.spacing / self.distance
    }

    /// Zero-point amplitude at ω₀ relative to the spacing.
    pub fn displacement_ratio(&self, consts: &PhysicalConstants) -> f64 {
        let omega0 = phonon_frequency_scale(consts, &self.species, self.spacing);
        consts.zero_point_length(self.species.mass, omega0) / self.spacing
    }

    /// Worst of the two checks `x_i ≪ l` and `N·l ≪ R`, each valid below 0.1.
    pub fn hierarchy(&self, consts: &PhysicalConstants) -> Validity {
        let extent = classify_small(self.extent_ratio(), 0.1, 1.0);
        let displacement = classify_small(self.displacement_ratio(consts), 0.1, 1.0);
        extent.max(displacement)
    }
}

fn classify_large(ratio: f64, valid_above: f64, marginal_above: f64) -> Validity {
    if ratio > valid_above {
        Validity::Valid
    } else if ratio > marginal_above {
        Validity::Marginal
    } else {
        Validity::Violated
    }
}

fn classify_small(ratio: f64, valid_below: f64, marginal_below: f64) -> Validity {
    if ratio < valid_below {
        Validity::Valid
    } else if ratio < marginal_below {
        Validity::Marginal
    } else {
        Validity::Violated
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be finite and > 0 (got {v})")))
    }
}

pub(crate) fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be finite and >= 0 (got {v})")))
    }
}

/// Mean number of cantilever quanta N̄ = k_B T_c / (ħ ω_c).
pub fn thermal_occupation(consts: &PhysicalConstants, c: &CantileverParams) -> f64 {
    match c.occupation {
        Occupation::Quanta(n) => n,
        Occupation::Temperature(t) => consts.k_b * t / (consts.hbar * c.omega_c),
    }
}

/// Trap frequency tightened by the tip dipole,
/// `ω_t′ = sqrt(ω_t² + 3 d_m d_c / (π ε₀ m R⁵))`.
pub fn shifted_trap_frequency(consts: &PhysicalConstants, s: &SingleMoleculeSetup, c: &CantileverParams) -> f64 {
    let m = &s.species;
    let stiffening = 3.0 * m.dipole * c.dipole / (PI * consts.epsilon0 * m.mass * s.distance.powi(5));
    (s.trap_omega * s.trap_omega + stiffening).sqrt()
}

/// Single-mode squeezing rate C for a molecule whose (shifted) trap
/// frequency is already known.
///
/// `C = sqrt(N̄) · 15 d_m d_c / (4π ε₀ m ω_t′ R⁶) · sqrt(ħ / 2 m_c ω_c)`
pub fn single_mode_coupling_at(
    consts: &PhysicalConstants,
    species: &MoleculeSpecies,
    distance: f64,
    c: &CantileverParams,
    shifted_trap_omega: f64,
) -> Result<f64> {
    if shifted_trap_omega <= 0.0 {
        return Err(Error::Singular("single-mode coupling needs a non-zero shifted trap frequency"));
    }
    let n_bar = thermal_occupation(consts, c);
    let k = consts.dipole_prefactor(species.dipole, c.dipole);
    Ok(n_bar.sqrt() * 15.0 * k / (species.mass * shifted_trap_omega * distance.powi(6)) * c.zero_point_length(consts))
}

/// Single-mode squeezing rate C, computing ω_t′ from the setup first.
pub fn single_mode_coupling(consts: &PhysicalConstants, s: &SingleMoleculeSetup, c: &CantileverParams) -> Result<f64> {
    let omega_t = shifted_trap_frequency(consts, s, c);
    single_mode_coupling_at(consts, &s.species, s.distance, c, omega_t)
}

/// Phonon frequency scale `ω₀ = d_m sqrt(3 / (2π ε₀ m l⁵))`.
pub fn phonon_frequency_scale(consts: &PhysicalConstants, species: &MoleculeSpecies, spacing: f64) -> f64 {
    species.dipole * (3.0 / (2.0 * PI * consts.epsilon0 * species.mass * spacing.powi(5))).sqrt()
}

/// Acoustic dispersion `ω_k = 2 ω₀ |sin(k l / 2)|` on the first zone.
pub fn phonon_dispersion(consts: &PhysicalConstants, cr: &CrystalSetup, k: f64) -> Result<f64> {
    let edge = cr.zone_edge();
    if !(k.abs() <= edge * (1.0 + 1e-12)) {
        return Err(Error::OutsideZone { what: "phonon wavenumber", k, limit: edge });
    }
    let omega0 = phonon_frequency_scale(consts, &cr.species, cr.spacing);
    Ok(2.0 * omega0 * (0.5 * k * cr.spacing).sin().abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononShift {
    /// Unperturbed ω_k.
    pub omega: f64,
    /// Shifted ω_k′.
    pub shifted: f64,
    /// (ω_k′ − ω_k) / ω_k.
    pub relative_shift: f64,
    /// `Marginal` once the relative shift exceeds 0.1.
    pub status: Validity,
}

/// Phonon frequency shifted by the static tip field,
/// `ω_k′ ≈ ω_k + d_m d_c / (4π ε₀ m ω_k² R⁵)`.
///
/// The correction is evaluated with every input in SI units. It is not
/// dimensionally homogeneous with ω_k, so it only has meaning in SI.
pub fn shifted_phonon_frequency(
    consts: &PhysicalConstants,
    cr: &CrystalSetup,
    c: &CantileverParams,
    k: f64,
) -> Result<PhononShift> {
    let omega = phonon_dispersion(consts, cr, k)?;
    if omega == 0.0 {
        return Err(Error::Singular("phonon shift diverges at k = 0"));
    }
    let kd = consts.dipole_prefactor(cr.species.dipole, c.dipole);
    let shift = kd / (cr.species.mass * omega * omega * cr.distance.powi(5));
    let relative_shift = shift / omega;
    let status = if relative_shift > 0.1 { Validity::Marginal } else { Validity::Valid };
    Ok(PhononShift { omega, shifted: omega + shift, relative_shift, status })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCoupling {
    /// Signed single-quantum coupling C_k′ (negative for positive inputs).
    pub c_k_prime: f64,
    /// Pumped coupling C_k = sqrt(N̄) C_k′.
    pub c_k: f64,
    /// Shifted phonon frequency the coupling was evaluated at.
    pub omega_shifted: f64,
}

impl TwoModeCoupling {
    /// Magnitude consumed by the dynamics.
    pub fn rate(&self) -> f64 {
        self.c_k.abs()
    }
}

/// Cantilever–phonon coupling at a given ω_k′,
/// `C_k′ = −3 d_m d_c / (2π ε₀ m ω_k′ R⁶) · sqrt(ħ / 2 m_c ω_c)`.
pub fn two_mode_coupling_at(
    consts: &PhysicalConstants,
    species: &MoleculeSpecies,
    distance: f64,
    c: &CantileverParams,
    omega_shifted: f64,
) -> Result<TwoModeCoupling> {
    if omega_shifted <= 0.0 {
        return Err(Error::Singular("two-mode coupling needs a non-zero phonon frequency"));
    }
    let kd = consts.dipole_prefactor(species.dipole, c.dipole);
    // 3/(2π ε₀) = 6/(4π ε₀)
    let c_k_prime = -6.0 * kd / (species.mass * omega_shifted * distance.powi(6)) * c.zero_point_length(consts);
    let c_k = thermal_occupation(consts, c).sqrt() * c_k_prime;
    Ok(TwoModeCoupling { c_k_prime, c_k, omega_shifted })
}

/// Cantilever–phonon coupling at wavenumber k, using [`shifted_phonon_frequency`].
pub fn two_mode_coupling(
    consts: &PhysicalConstants,
    cr: &CrystalSetup,
    c: &CantileverParams,
    k: f64,
) -> Result<TwoModeCoupling> {
    let shift = shifted_phonon_frequency(consts, cr, c, k)?;
    two_mode_coupling_at(consts, &cr.species, cr.distance, c, shift.shifted)
}

/// Cantilever frequency that drives a mode at `target` parametrically: 2·target.
pub fn resonance_frequency(target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::validation(format!("resonance target must be > 0 (got {target})")));
    }
    Ok(2.0 * target)
}

/// ω_c − 2·target.
pub fn detuning(c: &CantileverParams, target: f64) -> f64 {
    c.omega_c - 2.0 * target
}

/// Time interval on which the damped single-mode variance formula applies,
/// `D < 1/t < 2C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityWindow {
    pub t_min: f64,
    /// Infinite when D = 0.
    pub t_max: f64,
}

impl ValidityWindow {
    pub fn is_empty(&self) -> bool {
        self.t_max <= self.t_min
    }

    /// Strict containment.
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_min && t < self.t_max
    }
}

pub fn validity_window(coupling: f64, damping: f64) -> Result<ValidityWindow> {
    check_positive("coupling", coupling)?;
    check_non_negative("damping", damping)?;
    let t_max = if damping == 0.0 { f64::INFINITY } else { 1.0 / damping };
    Ok(ValidityWindow { t_min: 1.0 / (2.0 * coupling), t_max })
}
