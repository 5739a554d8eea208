//! Thermal states of two inductively coupled superconducting LC circuits,
//! their q-entropies, and the subadditivity and purity diagnostics built on
//! top of them.
//!
//! The pipeline is
//! [`model`] (normal modes) → [`transform`] (basis-change overlaps) →
//! [`state`] (thermal density matrix, partial traces, purity) →
//! [`entropy`] (von Neumann / Tsallis entropies, mutual information).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod hermite;
pub mod model;
pub mod state;
pub mod transform;

pub use error::{Error, Result};
