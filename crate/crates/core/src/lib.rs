//! Construction of the KMR minimal surfaces `M_{θ,α,π/2}` from Weierstrass
//! data and their use as Jenkins-Serrin graphs over marked strips.
//!
//! The crate is `no_std` with `alloc`. IO, CLI and file formats live in the
//! companion `kmr` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curve;
pub mod error;
pub mod geom;
pub mod graph;
pub mod ode;
pub mod quadrature;
pub mod solver;
pub mod surface;
pub mod weierstrass;

pub use error::{KmrError, Result};
pub use geom::Vec3;
