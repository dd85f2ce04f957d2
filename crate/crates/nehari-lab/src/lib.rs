#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for the doubly coupled Schrödinger–Poisson (Hartree)
//! system on radial functions in R^3.

pub mod cli;
pub mod coulomb;
pub mod energy;
pub mod error;
pub mod fibering;
pub mod linalg;
mod ode;
mod optim;
pub mod lambda_max;
pub mod multibump;
pub mod radial_core;
pub mod soliton;
pub mod solver;
pub mod thresholds;
pub mod verify;

pub use error::{LabError, Result};
