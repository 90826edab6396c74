#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod convergence;
pub mod disk;
pub mod error;
pub mod field;
pub mod forms;
pub mod galerkin;
pub mod geometry;
pub mod mesh;
mod roots;
pub mod sample_fields;
pub mod spinor;

pub use error::{Error, Result};
