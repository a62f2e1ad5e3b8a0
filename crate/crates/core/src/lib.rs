//! Numerical laboratory for the Hunter–Saxton equation on the real line,
//!
//! `u_t + u u_x = ∫_{-∞}^x ½ u_x² dz + g(t)`,
//!
//! with an exact characteristics solver, an independent method-of-lines solver,
//! Littlewood–Paley norms, a Picard-iteration simulator and experiment drivers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod eulerian;
pub mod experiments;
pub mod grid;
pub mod lagrangian;
pub mod littlewood_paley;
pub mod picard;

pub use error::{Error, Result};
