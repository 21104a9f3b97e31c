//! Physical parameters of the two-site electron-transfer system.

use num_complex::Complex64;

use crate::constants::{HBAR, KB};
use crate::error::{EtError, Result};

/// Donor/acceptor pair coupled to a Debye solvent.
///
/// Energies are kJ/mol, `temperature` in K, `tau_l` (longitudinal relaxation
/// time) in ps. The solvent relaxation rate `gamma = 1 / tau_l` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtSystem {
    e0: f64,
    lambda: f64,
    v: f64,
    temperature: f64,
    tau_l: f64,
}

/// Result of the semiclassical-temperature check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// k_B T / sqrt(V² + E°²/4); infinite when both V and E° vanish.
    pub ratio: f64,
    pub valid: bool,
}

impl EtSystem {
    pub fn new(e0: f64, lambda: f64, v: f64, temperature: f64, tau_l: f64) -> Result<Self> {
        check_finite("e0", e0)?;
        check_finite("v", v)?;
        check_positive("lambda", lambda)?;
        check_positive("temperature", temperature)?;
        check_positive("tau_l", tau_l)?;
        Ok(Self {
            e0,
            lambda,
            v,
            temperature,
            tau_l,
        })
    }

    /// Reaction endothermicity E°, kJ/mol.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Solvent reorganization energy λ, kJ/mol.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Transfer coupling V, kJ/mol.
    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Longitudinal relaxation time τ_L, ps.
    pub fn tau_l(&self) -> f64 {
        self.tau_l
    }

    /// Solvent relaxation rate γ = 1/τ_L, ps⁻¹.
    pub fn gamma(&self) -> f64 {
        1.0 / self.tau_l
    }

    /// k_B T in kJ/mol.
    pub fn kbt(&self) -> f64 {
        KB * self.temperature
    }

    /// Energy of the acceptor site in the reduced Hamiltonian, E° + λ.
    pub fn bias(&self) -> f64 {
        self.e0 + self.lambda
    }

    pub fn with_e0(&self, e0: f64) -> Result<Self> {
        Self::new(e0, self.lambda, self.v, self.temperature, self.tau_l)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.e0, lambda, self.v, self.temperature, self.tau_l)
    }

    pub fn with_v(&self, v: f64) -> Result<Self> {
        Self::new(self.e0, self.lambda, v, self.temperature, self.tau_l)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.e0, self.lambda, self.v, temperature, self.tau_l)
    }

    pub fn with_tau_l(&self, tau_l: f64) -> Result<Self> {
        Self::new(self.e0, self.lambda, self.v, self.temperature, tau_l)
    }

    /// Bath coupling strength η = λ(2k_BT − iħγ)/ħ², ps⁻².
    ///
    /// This is the `ba,ba` element of the hierarchy down-coupling
    /// superoperator; its `ab,ab` partner is −η*.
    pub fn eta(&self) -> Complex64 {
        Complex64::new(2.0 * self.kbt(), -HBAR * self.gamma()) * (self.lambda / (HBAR * HBAR))
    }

    /// Checks k_B T against the system energy scale sqrt(V² + E°²/4).
    ///
    /// Below ratio 1 the high-temperature bath correlation is a poor
    /// approximation and rate constants may turn negative.
    pub fn semiclassical_validity(&self) -> Validity {
        let scale = (self.v * self.v + 0.25 * self.e0 * self.e0).sqrt();
        let ratio = if scale == 0.0 {
            f64::INFINITY
        } else {
            self.kbt() / scale
        };
        Validity {
            ratio,
            valid: ratio >= 1.0,
        }
    }
}

/// Longitudinal relaxation time from the Debye time and dielectric constants,
/// τ_L = τ_D ε_∞/ε₀.
pub fn tau_l_from_debye(tau_d: f64, eps_static: f64, eps_optical: f64) -> f64 {
    tau_d * eps_optical / eps_static
}

fn check_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(EtError::Parameter {
            field,
            value,
            reason: "must be finite",
        })
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    check_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(EtError::Parameter {
            field,
            value,
            reason: "must be positive",
        })
    }
}
