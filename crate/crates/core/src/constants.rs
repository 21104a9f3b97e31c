//! Physical constants in the engine's unit system.
//!
//! Energies are in kJ/mol, times in ps, temperatures in K and rates in ps⁻¹.

/// Reduced Planck constant, kJ·ps/mol.
pub const HBAR: f64 = 0.0635077993;

/// Boltzmann constant, kJ/(mol·K).
pub const KB: f64 = 0.0083144626;
