//! Simulation core for dispersive multi-atom phase gates and a labeled
//! graph-state engine.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`hilbert`], [`operator`], [`evolve`]: N three-level atoms coupled to one
//!   truncated bosonic mode, sparse operators and a fixed-step RK4
//!   Schrödinger integrator.
//! * [`model`]: drive parameters, the interaction-picture Hamiltonian and its
//!   adiabatically eliminated forms, regime checks.
//! * [`gates`]: conditional-phase extraction, the single-qubit correction
//!   frame, tunable phase schedules and the m-qubit entangling gate.
//! * [`graphs`]: graph states, stabilizers, local complementation, LC-orbit
//!   search and fusion plans.
//!
//! Units: every frequency is measured in units of the atom-mode coupling `g`
//! and every time in units of `1/g`.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod error;
pub mod evolve;
pub mod gates;
pub mod graphs;
pub mod hilbert;
pub mod matrix;
pub mod model;
pub mod operator;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Reduces an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    use num_traits::Float;
    let mut r = x - TAU * Float::floor(x / TAU);
    if r > PI {
        r -= TAU;
    }
    r
}
