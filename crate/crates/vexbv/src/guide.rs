//! The user guide, embedded from `book/src` so that every code block in the
//! book runs under `cargo test --doc`.  mdbook renders the same files, which
//! keeps the two in lockstep by construction.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grids.md")]
pub mod grids {}

#[doc = include_str!("../../../book/src/exponents.md")]
pub mod exponents {}

#[doc = include_str!("../../../book/src/phi-functions.md")]
pub mod phi_functions {}

#[doc = include_str!("../../../book/src/modulars.md")]
pub mod modulars {}

#[doc = include_str!("../../../book/src/variation.md")]
pub mod variation {}

#[doc = include_str!("../../../book/src/integrands.md")]
pub mod integrands {}

#[doc = include_str!("../../../book/src/relaxation.md")]
pub mod relaxation {}

#[doc = include_str!("../../../book/src/denoising.md")]
pub mod denoising {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli_usage {}
