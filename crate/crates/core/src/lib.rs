//! Discrete-time quantum walk for a massless spin-1 boson on a cubic lattice.
//!
//! The walk acts on `ℓ²(Z³) ⊗ C⁶` and in momentum space reduces to a 6×6
//! unitary per mode. The crate provides that kernel with its dispersion and
//! group velocity, a periodic lattice simulator for wave packets, the
//! direction dependence of the leading speed correction, and the conversion
//! of experimental Lorentz-violation limits into bounds on the lattice spacing.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod anisotropy;
pub mod bounds;
pub mod export;
pub mod lattice;
pub mod momentum;
pub mod verify;

pub use algebra::{Axis, InternalMatrix, C64, DIM};
pub use momentum::{GroupVelocity, Helicity, KernelError, ReducedMomentum};
