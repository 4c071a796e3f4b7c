//! Spectral Navier-Stokes on the periodic torus built around Gevrey norms:
//! truncated Fourier fields, mild-solution Picard iteration, exponential
//! time differencing, analyticity-radius estimation, turbulence diagnostics
//! and an executable suite of the smoothing and interpolation inequalities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod field;
pub mod forcing;
pub mod lattice;
pub mod mild;
pub mod norms;
pub mod params;
pub mod quadrature;
pub mod radius;
pub mod semigroup;
pub mod special;
pub mod spectral;
pub mod turbulence;
pub mod verifier;

pub use calibration::Calibration;
pub use error::{Error, Result};
pub use field::SpectralField;
pub use forcing::Forcing;
pub use lattice::{Lattice, WaveVector};
pub use params::PhysicalParams;
