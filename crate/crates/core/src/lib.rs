//! Exact simulation of quantum query algorithms and the compiler that turns a
//! `q`-query quantum algorithm for a permutation-symmetric function into a
//! classical randomized algorithm reading `x` on the image of a random
//! small-range function.
//!
//! Modules, bottom up:
//! - [`domain`]: input strings, index functions, partial boolean functions and
//!   brute-force symmetry checks.
//! - [`statevector`]: mixed-dimension dense statevector simulator.
//! - [`oracles`]: additive query oracles, counted classical access, and the
//!   composition gadget for `O_{x∘g}`.
//! - [`distributions`]: `D_r` and uniform permutations, sampled or enumerated.
//! - [`compiler`]: majority-of-three amplification and the compiled pipeline.
//! - [`disting`]: permutation versus small-range distinguishing probes.
//! - [`zoo`]: concrete functions and algorithms used as test vehicles.

pub mod compiler;
pub mod disting;
pub mod distributions;
pub mod domain;
pub mod error;
pub mod oracles;
pub mod statevector;
pub mod stats;
pub mod zoo;

pub use error::{Error, Result};
