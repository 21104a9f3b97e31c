//! Laplace-domain memory kernel of the Debye hierarchy by inverse
//! continued-fraction recursion.
//!
//! At every hierarchy level the kernel Π⁽ⁿ⁾(s) and the Green's function
//! G⁽ⁿ⁾(s) = [s + iL + Π⁽ⁿ⁾(s)]⁻¹ reduce to three independent complex
//! tensor elements each (the remaining nonzero entries are complex
//! conjugates). Indices are written in the double-bracket Liouville
//! notation with `a` the donor and `b` the acceptor:
//!
//! ```text
//! x = Π_{ba,ba}   y = Π_{ba,ab}   z = Π_{ba,bb}
//! X = G_{ba,ba}   Y = G_{ba,ab}   Z = G_{ba,bb}
//! ```
//!
//! The recursion starts from Π⁽ᴺ⁺¹⁾ = 0 and walks inward:
//! `kernel(n+1, s+γ) -> green(n+1, s+γ) -> kernel(n, s)`.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{EtError, Result};
use crate::system::EtSystem;

/// Denominators smaller than this are treated as genuine poles.
pub const SINGULAR_DENOMINATOR: f64 = 1e-300;

/// Magnitude below which kernel elements are compared absolutely during the
/// depth-doubling convergence test, ps⁻¹.
pub const ABSOLUTE_FLOOR: f64 = 1e-14;

/// First depth tried by [`kernel_converged`].
pub const INITIAL_DEPTH: usize = 4;

/// Largest depth tried by [`kernel_converged`].
pub const MAX_DEPTH: usize = 65_536;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Independent elements of the memory kernel Π⁽ⁿ⁾ at one Laplace argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelElements {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
    pub level: usize,
    pub s_arg: Complex64,
}

impl KernelElements {
    /// The truncation closure Π⁽ⁿ⁾ = 0.
    pub fn zero(level: usize, s_arg: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            x: zero,
            y: zero,
            z: zero,
            level,
            s_arg,
        }
    }
}

/// Independent elements of the Green's function G⁽ⁿ⁾ at one Laplace argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenElements {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
    pub level: usize,
    pub s_arg: Complex64,
}

/// Diagonal Dyson term α = s + i(E°+λ)/ħ + x.
pub fn alpha(s_arg: Complex64, x: Complex64, sys: &EtSystem) -> Complex64 {
    s_arg + I * (sys.bias() / HBAR) + x
}

/// Coupling-induced Dyson term β = s⁻¹ (V/ħ)(2V/ħ + i z).
///
/// Equivalent to s⁻¹(V/ħ)²(2 + iħz/V) but finite at V = 0.
pub fn beta(s_arg: Complex64, z: Complex64, sys: &EtSystem) -> Complex64 {
    let vh = sys.v() / HBAR;
    vh * (2.0 * vh + I * z) / s_arg
}

/// Green's function elements at level n from the kernel elements at the
/// same level and argument (closed-form 2×2 Dyson inversion).
pub fn green_from_kernel(
    s_arg: Complex64,
    kern: &KernelElements,
    sys: &EtSystem,
) -> Result<GreenElements> {
    if s_arg == Complex64::new(0.0, 0.0) || !s_arg.is_finite() {
        return Err(EtError::Argument(format!(
            "Green's function argument must be finite and nonzero, got {s_arg}"
        )));
    }
    if !same_argument(kern.s_arg, s_arg) {
        return Err(EtError::LevelMismatch(format!(
            "kernel evaluated at s = {} but Green's function requested at s = {s_arg}",
            kern.s_arg
        )));
    }

    let vh = sys.v() / HBAR;
    let a = alpha(s_arg, kern.x, sys);
    let b = beta(s_arg, kern.z, sys);
    let a_plus_b = a + b;
    let b_minus_y = b - kern.y;
    let denom = a_plus_b.norm_sqr() - b_minus_y.norm_sqr();
    if !(denom.abs() >= SINGULAR_DENOMINATOR) {
        return Err(EtError::SingularGreen {
            level: kern.level,
            s_arg,
        });
    }

    let x = a_plus_b.conj() / denom;
    let y = b_minus_y / denom;
    let z = -((kern.z - I * vh) * x + (kern.z.conj() + I * vh) * y) / s_arg;
    Ok(GreenElements {
        x,
        y,
        z,
        level: kern.level,
        s_arg,
    })
}

/// Kernel elements at level `n` and argument s from the Green's function at
/// level n+1 and argument s+γ.
pub fn descend(green: &GreenElements, n: usize, sys: &EtSystem) -> Result<KernelElements> {
    if green.level != n + 1 {
        return Err(EtError::LevelMismatch(format!(
            "descending to level {n} requires a level {} Green's function, got level {}",
            n + 1,
            green.level
        )));
    }
    let eta = sys.eta();
    let weight = (n + 1) as f64;
    Ok(KernelElements {
        x: eta * weight * green.x,
        y: -eta.conj() * weight * green.y,
        z: (eta - eta.conj()) * weight * green.z,
        level: n,
        s_arg: green.s_arg - sys.gamma(),
    })
}

/// Level-0 kernel Π(s) with the hierarchy truncated at Π⁽ᴺ⁺¹⁾ = 0.
///
/// Runs iteratively in O(1) memory; `s = 0` is allowed since every Green's
/// function is evaluated at s + nγ with n ≥ 1.
pub fn kernel_at(s: Complex64, depth: usize, sys: &EtSystem) -> Result<KernelElements> {
    if !s.is_finite() || s.re < 0.0 {
        return Err(EtError::Argument(format!(
            "Laplace argument must be finite with Re(s) >= 0, got {s}"
        )));
    }
    let gamma = sys.gamma();
    let top = depth + 1;
    let mut kern = KernelElements::zero(top, s + top as f64 * gamma);
    for n in (1..=top).rev() {
        let arg = s + n as f64 * gamma;
        let green = green_from_kernel(arg, &kern, sys)?;
        kern = descend(&green, n - 1, sys)?;
    }
    kern.s_arg = s;
    Ok(kern)
}

/// Level-0 kernel converged in hierarchy depth.
///
/// Depths 4, 8, 16, … are tried until every element changes by less than
/// `rel_tol` relative to its magnitude (elements below [`ABSOLUTE_FLOOR`] are
/// compared against the floor). Returns the deeper of the two agreeing
/// evaluations and its depth.
pub fn kernel_converged(
    s: Complex64,
    sys: &EtSystem,
    rel_tol: f64,
) -> Result<(KernelElements, usize)> {
    if !(rel_tol > 0.0) {
        return Err(EtError::Argument(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let mut depth = INITIAL_DEPTH;
    let mut previous = kernel_at(s, depth, sys)?;
    loop {
        depth *= 2;
        let current = kernel_at(s, depth, sys)?;
        if kernels_agree(&previous, &current, rel_tol) {
            return Ok((current, depth));
        }
        if depth >= MAX_DEPTH {
            return Err(EtError::Convergence {
                depth,
                rel_tol,
                previous: Box::new(previous),
                last: Box::new(current),
            });
        }
        previous = current;
    }
}

fn kernels_agree(a: &KernelElements, b: &KernelElements, rel_tol: f64) -> bool {
    [(a.x, b.x), (a.y, b.y), (a.z, b.z)].iter().all(|&(p, q)| {
        let scale = p.norm().max(q.norm()).max(ABSOLUTE_FLOOR);
        (p - q).norm() <= rel_tol * scale
    })
}

fn same_argument(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-10 * a.norm().max(b.norm()).max(1.0)
}
