//! Finite-dimensional operator algebras and quantum channels.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, tensor products, partial traces and
//!   the spectral calculus everything else is built on.
//! - [`quantum`]: density matrices, effects, ensembles, entropies and the
//!   Bloch ball.
//! - [`algebra`]: *-subalgebras of `M_d`, their center and block structure,
//!   and the canonical hybrid form of states on them.
//! - [`channels`]: completely positive maps in Kraus, Choi and Stinespring
//!   form, POVMs and classical stochastic maps.
//! - [`io`]: the JSON file formats.
//!
//! Randomized routines take an explicit `u64` seed; see [`random`].

pub mod algebra;
pub mod channels;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quantum;
pub mod random;

pub use error::{Error, Result};
