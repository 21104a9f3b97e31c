//! Nonperturbative electron-transfer rates and reaction thermodynamics for a
//! donor/acceptor pair in a Debye solvent.
//!
//! The Laplace-domain memory kernel of the exact (high-temperature) hierarchy
//! is evaluated by inverse continued-fraction recursion in [`cfkernel`];
//! [`rates`] turns it into forward/backward rate resolutions and
//! [`thermo`] into ΔG°, ΔS° and ΔH°. [`heom`] propagates the same hierarchy
//! in time as an independent check, and [`acceptance`] bundles the
//! end-to-end verification criteria.
//!
//! Units: kJ/mol, ps, K; rates in ps⁻¹.

// Guards like `!(x > 0.0)` are written negated on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cfkernel;
pub mod constants;
pub mod error;
pub mod heom;
pub mod rates;
pub mod system;
pub mod thermo;

pub use cfkernel::{GreenElements, KernelElements};
pub use error::{EtError, Result};
pub use rates::RatePair;
pub use system::{EtSystem, Validity};
pub use thermo::ThermoResult;

/// Default relative tolerance of the depth-converged kernel.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
