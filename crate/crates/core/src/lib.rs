//! Kinetic Fokker-Planck equations for bosons and fermions on `T x R`:
//! equilibria, the transport-damping threshold, the linearized collision
//! operator, a structure-preserving solver and relaxation diagnostics.

// comparisons are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod linop;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod threshold;

pub use error::{Error, Result};
pub use params::{ModelParams, Statistics, Transport};
