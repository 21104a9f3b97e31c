use num_complex::Complex64;
use thiserror::Error;

use crate::cfkernel::KernelElements;

pub type Result<T> = std::result::Result<T, EtError>;

#[derive(Debug, Clone, Error)]
pub enum EtError {
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    Parameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular Green's function denominator at level {level}, s = {s_arg}")]
    SingularGreen { level: usize, s_arg: Complex64 },

    #[error("hierarchy bookkeeping mismatch: {0}")]
    LevelMismatch(String),

    #[error("kernel not converged at depth {depth} (rel_tol = {rel_tol:e})")]
    Convergence {
        depth: usize,
        rel_tol: f64,
        previous: Box<KernelElements>,
        last: Box<KernelElements>,
    },

    #[error("singular rate denominator at s = {s_arg}")]
    SingularDenominator { s_arg: Complex64 },

    #[error("non-positive rate constant (forward = {forward:e}, backward = {backward:e}); semiclassical limit violated")]
    NonpositiveRate { forward: f64, backward: f64 },

    #[error("hierarchy propagation unstable: {0}")]
    Stability(String),

    #[error("population trace not equilibrated: |P_a(t_end) - P_a(0.9 t_end)| = {drift:e}")]
    NotEquilibrated { drift: f64 },

    #[error("population decay is not single-exponential: R^2 = {r_squared}")]
    PoorFit { r_squared: f64 },
}
