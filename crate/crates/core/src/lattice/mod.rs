//! Equilibrium and normal modes of a trapped chain of polar molecules.

mod chain;
mod eigen;
mod modes;

pub use chain::{
    chain_energy, chain_hessian, equilibrium_positions, pair_spacing, trap_for_central_spacing, ChainConfiguration,
    EnergyEval,
};
pub use eigen::{jacobi_eigen, SymmetricEigen};
pub use modes::{
    dispersion_compare, hessian_modes, lattice_sum_dispersion, DispersionReport, ModeComparison, NormalModeSpectrum,
};
