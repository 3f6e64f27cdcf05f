//! Variable-exponent function-space primitives on finite-difference grids:
//! modulars and Luxemburg norms, the dual variation of `BV^{p(·)}`-type
//! spaces, relaxed energies with recession-weighted singular parts, and the
//! machinery to bracket lower-semicontinuous envelopes between the
//! closed-form representation and constructed competitor sequences.
//!
//! Start with the guide in `book/` (also compiled as doc-tests in
//! [`guide`]), or with the `vexbv` binary for the file-driven interface.

// index loops over axes/nodes drive several parallel structures at once;
// rewriting them with enumerate() obscures the lattice arithmetic
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod corpus;
pub mod denoise;
pub mod energy;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod guide;
pub mod integrand;
pub mod io;
pub mod modular;
pub mod phi;
pub mod relax;
pub mod variation;

pub use error::{Error, Result};
