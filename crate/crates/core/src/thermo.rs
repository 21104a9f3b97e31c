//! Reaction thermodynamics from forward/backward rate constants, and the
//! solvent-modulation parameter κ.

use crate::constants::HBAR;
use crate::error::{EtError, Result};
use crate::rates::{self, RatePair};
use crate::system::EtSystem;

/// Default temperature step for the entropy central difference, K.
pub const DEFAULT_DELTA_T: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoResult {
    /// ΔG°, kJ/mol.
    pub dg: f64,
    /// ΔS°, kJ/(mol·K).
    pub ds: f64,
    /// ΔH° = ΔG° + TΔS°, kJ/mol.
    pub dh: f64,
    /// Temperature step δT used for ΔS°, K.
    pub temperature_step: f64,
    pub valid: bool,
}

/// ΔG° = −k_BT ln(k/k′) for given rate constants at the system temperature.
pub fn gibbs_from_rates(sys: &EtSystem, pair: &RatePair) -> Result<f64> {
    if !(pair.forward > 0.0 && pair.backward > 0.0) {
        return Err(EtError::NonpositiveRate {
            forward: pair.forward,
            backward: pair.backward,
        });
    }
    Ok(-sys.kbt() * (pair.forward / pair.backward).ln())
}

/// Reaction Gibbs free energy ΔG°, kJ/mol.
pub fn gibbs(sys: &EtSystem, rel_tol: f64) -> Result<f64> {
    gibbs_from_rates(sys, &rates::rate_constants(sys, rel_tol)?)
}

/// ΔG°, ΔS° by central difference in temperature, and ΔH°.
pub fn entropy_enthalpy(sys: &EtSystem, delta_t: f64, rel_tol: f64) -> Result<ThermoResult> {
    let t = sys.temperature();
    if !(delta_t > 0.0 && t - delta_t > 0.0) {
        return Err(EtError::Argument(format!(
            "temperature step must satisfy 0 < delta_t < T, got {delta_t} at T = {t}"
        )));
    }
    let dg = gibbs(sys, rel_tol)?;
    let dg_hot = gibbs(&sys.with_temperature(t + delta_t)?, rel_tol)?;
    let dg_cold = gibbs(&sys.with_temperature(t - delta_t)?, rel_tol)?;
    let ds = -(dg_hot - dg_cold) / (2.0 * delta_t);
    Ok(ThermoResult {
        dg,
        ds,
        dh: dg + t * ds,
        temperature_step: delta_t,
        valid: sys.semiclassical_validity().valid,
    })
}

/// κ = ħ/(τ_L sqrt(2k_BTλ)); κ ≫ 1 is fast and κ ≪ 1 slow solvent modulation.
pub fn kappa(sys: &EtSystem) -> f64 {
    HBAR / (sys.tau_l() * (2.0 * sys.kbt() * sys.lambda()).sqrt())
}

/// τ_L (ps) at which the solvent-modulation parameter equals `kappa`.
pub fn tau_l_for_kappa(kappa: f64, lambda: f64, temperature: f64) -> f64 {
    HBAR / (kappa * (2.0 * crate::constants::KB * temperature * lambda).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-10;

    fn sys(e0: f64, lambda: f64, tau: f64) -> EtSystem {
        EtSystem::new(e0, lambda, 1.0, 298.0, tau).unwrap()
    }

    #[test]
    fn kappa_calibration() {
        let tau = tau_l_for_kappa(1.0, 3.0, 298.0);
        assert!((tau - 0.0165).abs() / 0.0165 < 0.01, "tau = {tau}");
        assert_relative_eq!(kappa(&sys(0.0, 3.0, tau)), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn kappa_scales_inversely_with_tau() {
        let a = kappa(&sys(-3.0, 3.0, 0.7));
        let b = kappa(&sys(-3.0, 3.0, 1.4));
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-14);
        assert_relative_eq!(kappa(&sys(-3.0, 3.0, 10.0)), 1.6471e-3, max_relative = 1e-4);
    }

    #[test]
    fn symmetric_system_has_no_free_energy() {
        let r = entropy_enthalpy(&sys(0.0, 3.0, 0.1), 1.0, TOL).unwrap();
        assert!(r.dg.abs() < 1e-6 && r.ds.abs() < 1e-6 && r.dh.abs() < 1e-6);
    }

    #[test]
    fn free_energy_is_antisymmetric() {
        let plus = gibbs(&sys(3.0, 3.0, 1.0), TOL).unwrap();
        let minus = gibbs(&sys(-3.0, 3.0, 1.0), TOL).unwrap();
        assert!((plus + minus).abs() < 1e-6, "{plus} vs {minus}");
    }

    #[test]
    fn reference_system_ordering() {
        let r = entropy_enthalpy(&sys(-3.0, 3.0, 1.0), DEFAULT_DELTA_T, TOL).unwrap();
        assert!(r.dg < 0.0 && r.dh < 0.0);
        assert!(r.dh.abs() >= r.dg.abs() && r.dg.abs() >= 3.0);
        assert_eq!(r.dh, r.dg + 298.0 * r.ds);
    }

    #[test]
    fn entropy_step_robustness() {
        let s0 = sys(-3.0, 3.0, 1.0);
        let fine = entropy_enthalpy(&s0, 0.5, TOL).unwrap().ds;
        let coarse = entropy_enthalpy(&s0, 2.0, TOL).unwrap().ds;
        assert!((fine - coarse).abs() / fine.abs() < 0.01);
    }

    #[test]
    fn nonpositive_rates_are_an_error() {
        let s0 = sys(-3.0, 3.0, 1.0);
        let pair = RatePair {
            forward: 1.0,
            backward: -0.5,
            s_arg: 0.0,
            n_used: 8,
            valid: false,
        };
        assert!(matches!(
            gibbs_from_rates(&s0, &pair),
            Err(EtError::NonpositiveRate { .. })
        ));
    }

    #[test]
    fn bad_temperature_step() {
        let s0 = EtSystem::new(-3.0, 3.0, 1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            entropy_enthalpy(&s0, 1.0, TOL),
            Err(EtError::Argument(_))
        ));
        assert!(matches!(
            entropy_enthalpy(&s0, 0.0, TOL),
            Err(EtError::Argument(_))
        ));
    }
}
