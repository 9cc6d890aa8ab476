//! Search engine for hybrid quantum-classical classifiers.
//!
//! The crate covers the full pipeline: a discrete architecture space of
//! parameterized quantum circuits ([`genome`]), a dense state-vector
//! simulator with adjoint-mode gradients ([`qsim`]), an analytic FLOP cost
//! model ([`flops`]), a trainable linear/circuit/linear sandwich model
//! ([`model`]), dataset splitting and standardization ([`data`]), and an
//! NSGA-II loop that minimizes quantum FLOPs, validation error, and
//! parameter count at once ([`nsga`]).
//!
//! Everything here is pure computation over in-memory values. File formats,
//! dataset loading, and the command-line interface live in the companion
//! `qpareto-cli` crate. The crate is `no_std`-compatible (with `alloc`);
//! disable the default `std` feature and enable `libm` to build it that way.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod data;
pub mod flops;
mod fmath;
pub mod genome;
pub mod model;
pub mod nsga;
pub mod qsim;
pub mod seed;

pub use genome::Genome;
pub use nsga::{run_search, SearchConfig, SearchResult};

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("no_std builds need the `libm` feature for float math");
