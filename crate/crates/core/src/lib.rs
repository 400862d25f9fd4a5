//! Rigid-manipulator dynamics and velocity-free (position-feedback) control.
//!
//! The crate is `no_std` with `alloc`. It provides:
//!
//! - [`dynamics`]: pluggable models of `H(q) q̈ + C(q, q̇) q̇ + G(q) = τ`, the
//!   Christoffel-built Coriolis matrix and the model constants used by gain
//!   conditions;
//! - [`signal`]: the dirty-derivative filter and the two velocity observers;
//! - [`control`]: the six control laws and their gain-condition checks;
//! - [`reference`]: set-points and smooth sinusoidal references;
//! - [`sim`]: the fixed-step RK4 closed-loop simulator and performance metrics.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod control;
pub mod dynamics;
pub mod error;
pub mod reference;
pub mod sampling;
pub mod signal;
pub mod sim;

pub use error::{Error, Result};
