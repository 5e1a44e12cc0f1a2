#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod currents;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lambert;
pub mod quadrature;
pub mod verify;
pub mod wavefunction;
pub mod weakvalues;

pub use error::{Error, Result};
