//! Numerical laboratory for family Bergman kernels on the fibration
//! `P¹ × {|s| < s_max} → {|s| < s_max}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bergman;
pub mod config;
pub mod error;
pub mod family;
pub mod forms;
pub mod geometry;
pub mod hilbert;
pub mod linalg;
pub mod predictions;
pub mod report;
pub mod quadrature;
pub mod scenario;
pub mod taylor;
pub mod verify;

pub use error::{Error, Result};
