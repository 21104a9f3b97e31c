//! Forward/backward electron-transfer rate resolutions from the level-0
//! memory kernel, the population rate-kernel matrix, and the Marcus
//! reference rate.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::cfkernel::{self, KernelElements};
use crate::constants::HBAR;
use crate::error::{EtError, Result};
use crate::system::EtSystem;

/// Forward (a → b) and backward (b → a) rates, ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub forward: f64,
    pub backward: f64,
    pub s_arg: f64,
    /// Hierarchy depth behind the kernel; 0 when the caller supplied the kernel.
    pub n_used: usize,
    /// Semiclassical-temperature flag of the system.
    pub valid: bool,
}

/// Rate resolutions k(s) and k′(s) from the level-0 kernel elements.
///
/// k(s)  = (2V²/ħ²) Re[(α+y)/(|α|²−|y|²)]
/// k′(s) = Re[(α+y)(2V² − 2iħV z*)] / (ħ²(|α|²−|y|²))
///
/// with α = s + i(E°+λ)/ħ + x. Both vanish identically at V = 0.
pub fn rate_resolutions(s: f64, kern: &KernelElements, sys: &EtSystem) -> Result<RatePair> {
    let s_arg = check_kernel(s, kern)?;
    let a = cfkernel::alpha(s_arg, kern.x, sys);
    let denom = norm_sqr_difference(a, kern.y);
    if !(denom.abs() >= cfkernel::SINGULAR_DENOMINATOR) {
        return Err(EtError::SingularDenominator { s_arg });
    }
    let v = sys.v();
    let numer = a + kern.y;
    let forward = 2.0 * v * v / (HBAR * HBAR) * numer.re / denom;
    let backward_factor =
        Complex64::new(2.0 * v * v, 0.0) - Complex64::new(0.0, 2.0 * HBAR * v) * kern.z.conj();
    let backward = (numer * backward_factor).re / (HBAR * HBAR * denom);
    Ok(RatePair {
        forward,
        backward,
        s_arg: s,
        n_used: 0,
        valid: sys.semiclassical_validity().valid,
    })
}

/// Rate constants k = k(0), k′ = k′(0) with the kernel converged in depth.
pub fn rate_constants(sys: &EtSystem, rel_tol: f64) -> Result<RatePair> {
    rates_at(0.0, sys, rel_tol)
}

/// Rate resolutions at real s ≥ 0 with the kernel converged in depth.
pub fn rates_at(s: f64, sys: &EtSystem, rel_tol: f64) -> Result<RatePair> {
    let (kern, n_used) = cfkernel::kernel_converged(Complex64::new(s, 0.0), sys, rel_tol)?;
    let mut pair = rate_resolutions(s, &kern, sys)?;
    pair.n_used = n_used;
    Ok(pair)
}

/// Population rate-kernel matrix K(s) = T_PC (s + T_CC)⁻¹ T_CP in the
/// population basis [P_a, P_b].
///
/// The forward rate is −Re K_aa and the backward rate Re K_ab; columns sum
/// to zero.
pub fn assemble_k(s: f64, kern: &KernelElements, sys: &EtSystem) -> Result<Matrix2<Complex64>> {
    let s_arg = check_kernel(s, kern)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let vh = sys.v() / HBAR;
    let eps = sys.bias() / HBAR;
    let zero = c(0.0, 0.0);

    // T_PC = i(V/ħ)·P with P the exact population-difference pattern.
    let pattern = Matrix2::new(c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0));
    let coupling = c(0.0, vh);
    let t_cp = pattern * coupling + Matrix2::new(zero, kern.z.conj(), zero, kern.z);
    let t_cc = Matrix2::new(
        c(0.0, -eps) + kern.x.conj(),
        kern.y.conj(),
        kern.y,
        c(0.0, eps) + kern.x,
    );
    let shifted = Matrix2::from_diagonal_element(s_arg) + t_cc;
    let det = determinant(&shifted);
    if !(det.norm() >= cfkernel::SINGULAR_DENOMINATOR) {
        return Err(EtError::SingularDenominator { s_arg });
    }
    // The pattern rows cancel nearly equal adjugate entries; applying them
    // exactly before any scaling keeps the small differences accurate.
    let adjugate = Matrix2::new(
        shifted[(1, 1)],
        -shifted[(0, 1)],
        -shifted[(1, 0)],
        shifted[(0, 0)],
    );
    Ok((pattern * adjugate) * t_cp * (coupling / det))
}

/// Nonadiabatic static-solvation (Marcus) rate,
/// k = (V²/ħ)/sqrt(λk_BT/π) · exp[−(E°+λ)²/(4λk_BT)].
pub fn marcus_rate(sys: &EtSystem) -> f64 {
    let lkt = sys.lambda() * sys.kbt();
    let v = sys.v();
    v * v / HBAR / (lkt / PI).sqrt() * (-sys.bias().powi(2) / (4.0 * lkt)).exp()
}

/// 2×2 complex determinant with each real difference of products
/// compensated by a fused multiply-add, so near-singular matrices keep
/// their relative accuracy.
fn determinant(m: &Matrix2<Complex64>) -> Complex64 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let re = difference_of_products(a.re, d.re, b.re, c.re)
        - difference_of_products(a.im, d.im, b.im, c.im);
    let im = difference_of_products(a.re, d.im, b.re, c.im)
        + difference_of_products(a.im, d.re, b.im, c.re);
    Complex64::new(re, im)
}

/// a·b − c·d with a single effective rounding (Kahan's algorithm).
fn difference_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    a.mul_add(b, -cd) + err
}

/// |a|² − |b|² as a sum of factored differences, which keeps relative
/// accuracy when the two magnitudes nearly cancel.
fn norm_sqr_difference(a: Complex64, b: Complex64) -> f64 {
    (a.re - b.re) * (a.re + b.re) + (a.im - b.im) * (a.im + b.im)
}

fn check_kernel(s: f64, kern: &KernelElements) -> Result<Complex64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(EtError::Argument(format!(
            "rate argument must be real and >= 0, got {s}"
        )));
    }
    if kern.level != 0 {
        return Err(EtError::LevelMismatch(format!(
            "rates need the level-0 kernel, got level {}",
            kern.level
        )));
    }
    let s_arg = Complex64::new(s, 0.0);
    if (kern.s_arg - s_arg).norm() > 1e-10 * s.max(1.0) {
        return Err(EtError::LevelMismatch(format!(
            "kernel evaluated at s = {} but rates requested at s = {s}",
            kern.s_arg
        )));
    }
    Ok(s_arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sys(e0: f64, lambda: f64, v: f64, tau: f64) -> EtSystem {
        EtSystem::new(e0, lambda, v, 298.0, tau).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_rates_and_matrix() {
        let s0 = sys(-2.0, 3.0, 0.0, 0.5);
        let kern = cfkernel::kernel_at(Complex64::new(0.0, 0.0), 16, &s0).unwrap();
        let r = rate_resolutions(0.0, &kern, &s0).unwrap();
        assert_eq!(r.forward, 0.0);
        assert_eq!(r.backward, 0.0);
        let k = assemble_k(0.0, &kern, &s0).unwrap();
        assert!(k.iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn matrix_route_matches_closed_form() {
        let s0 = sys(-3.0, 3.0, 1.0, 1.0);
        for s in [0.0, 0.3, 5.0] {
            let kern = cfkernel::kernel_at(Complex64::new(s, 0.0), 40, &s0).unwrap();
            let r = rate_resolutions(s, &kern, &s0).unwrap();
            let k = assemble_k(s, &kern, &s0).unwrap();
            assert_relative_eq!(-k[(0, 0)].re, r.forward, max_relative = 1e-10);
            assert_relative_eq!(k[(0, 1)].re, r.backward, max_relative = 1e-10);
            // population conservation: columns sum to zero
            for j in 0..2 {
                assert!((k[(0, j)] + k[(1, j)]).norm() <= 1e-12 * k[(0, j)].norm());
            }
        }
    }

    #[test]
    fn kernel_bookkeeping_is_checked() {
        let s0 = sys(-3.0, 3.0, 1.0, 1.0);
        let kern = cfkernel::kernel_at(Complex64::new(0.5, 0.0), 8, &s0).unwrap();
        assert!(matches!(
            rate_resolutions(0.0, &kern, &s0),
            Err(EtError::LevelMismatch(_))
        ));
        assert!(matches!(
            rate_resolutions(-1.0, &kern, &s0),
            Err(EtError::Argument(_))
        ));
        let mut deeper = kern;
        deeper.level = 2;
        assert!(matches!(
            assemble_k(0.5, &deeper, &s0),
            Err(EtError::LevelMismatch(_))
        ));
    }

    #[test]
    fn marcus_activationless_value() {
        // (1e-4 / ħ) / sqrt(3 k_B 298 / π)
        let r = marcus_rate(&sys(-3.0, 3.0, 0.01, 10.0));
        assert_relative_eq!(r, 1.0236748e-3, max_relative = 1e-7);
    }

    #[test]
    fn marcus_symmetric_in_driving_force_offset() {
        let a = marcus_rate(&sys(-1.0, 3.0, 0.3, 1.0));
        let b = marcus_rate(&sys(-5.0, 3.0, 0.3, 1.0));
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn marcus_log_is_parabolic() {
        let base = sys(0.0, 3.0, 0.2, 1.0);
        let curvature = -1.0 / (4.0 * 3.0 * base.kbt());
        let h = 0.5;
        for e0 in [-6.0, -3.0, -1.0, 2.0] {
            let ln = |e: f64| marcus_rate(&base.with_e0(e).unwrap()).ln();
            let second = (ln(e0 + h) - 2.0 * ln(e0) + ln(e0 - h)) / (h * h);
            assert_relative_eq!(second, 2.0 * curvature, max_relative = 1e-9);
        }
    }

    #[test]
    fn symmetric_system_has_equal_rates() {
        let s0 = sys(0.0, 3.0, 1.0, 0.0165);
        let r = rate_constants(&s0, 1e-10).unwrap();
        assert!((r.forward - r.backward).abs() <= 1e-6 * r.forward);
        assert!(r.valid && r.n_used >= 8);
    }

    #[test]
    fn weak_coupling_slow_solvent_is_marcus_like() {
        let s0 = sys(-3.0, 3.0, 0.01, 10.0);
        let r = rate_constants(&s0, 1e-10).unwrap();
        let m = marcus_rate(&s0);
        assert!(
            (r.forward - m).abs() / m < 0.02,
            "k = {}, marcus = {m}",
            r.forward
        );
    }

    #[test]
    fn tiny_reorganization_rate_is_finite_and_linear() {
        let k = |lambda: f64| {
            rate_constants(
                &EtSystem::new(-1.0, lambda, 0.01, 298.0, 1.0).unwrap(),
                1e-10,
            )
            .unwrap()
            .forward
        };
        let (a, b) = (k(1e-6), k(2e-6));
        assert!(a.is_finite() && a > 0.0);
        assert_relative_eq!(b / a, 2.0, max_relative = 1e-3);
    }
}
