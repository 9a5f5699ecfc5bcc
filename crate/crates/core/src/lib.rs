//! Simulation of a superconducting nonlinear (Kerr) microwave interferometer.
//!
//! The crate is layered bottom-up:
//!
//! * [`fock`] – truncated Fock-space states, ladder operators and the exact
//!   beamsplitter / Kerr evolutions used as a numerical oracle.
//! * [`interferometer`] – the coupler → Kerr arm → coupler → homodyne pipeline,
//!   closed-form quadrature moments and the nonlinear-phase precision.
//! * [`device`] – plate capacitance → detunings → Kerr coefficient, and the
//!   displacement precision obtained by chaining through `dη/dr`.
//! * [`metrology`] – cantilever mechanics, force/gravity resolution and
//!   zero-point motion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod device;
pub mod diff;
mod error;
pub mod fock;
pub mod interferometer;
pub mod metrology;

pub use error::{Error, Result};
