//! Near-field matter-wave interferometry models.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod config;
pub mod engine;
pub mod error;
pub mod grating;
pub mod keyvalue;
pub mod molecule;
pub mod physics;
pub mod quadrature;
pub mod scan;
pub mod sweep;

pub use error::{Error, Result};
