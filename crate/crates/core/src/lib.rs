//! Finite-element laboratory for two-inclusion high-contrast conductivity and
//! rigid-inclusion elasticity problems, and for measuring how their solutions
//! move when one inclusion is translated.

pub mod cli;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod lame;
pub mod meshing;
pub mod pullback;
pub mod scalar;
pub mod selftest;
pub mod stability;

pub use error::{Error, Result};
