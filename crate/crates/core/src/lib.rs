#![cfg_attr(not(feature = "std"), no_std)]
// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Holographic ISAC beamforming on a reconfigurable holographic surface with
//! coupled-dipole mutual coupling.

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod digital;
pub mod error;
pub mod holo;
pub mod linalg;
pub mod math;
pub mod optimize;
pub mod rhs;
pub mod scenario;
pub mod sdp;

pub use error::{ConstraintFamily, Error, InfeasibilityReport, Result};
