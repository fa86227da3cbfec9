//! Partly smooth regularizers with their linearized certificates, and a
//! Forward-Backward solver that tracks model identification.

pub mod certificate;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod problems;
pub mod regularizer;
mod simplex;
pub mod solver;

pub use error::{Error, Result};
