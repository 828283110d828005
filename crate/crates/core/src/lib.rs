//! Modal simulation of linearized water waves in a rectangular tank driven by
//! a wavemaker on the left wall.
//!
//! The crate covers the spectral data of the surface operator, the boundary
//! maps used to reconstruct the potential, wavemaker-profile diagnostics,
//! a structure-preserving integrator for the truncated dynamics, and decay
//! analysis of closed-loop runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod boundary;
pub mod cli;
pub mod error;
pub mod exec;
pub mod hyperbolic;
pub mod io;
pub mod profile;
pub mod quadrature;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
