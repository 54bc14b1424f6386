//! Discrete and continuum arrays whose aperiodic auto-correlation mimics a delta.
//!
//! The crate builds canonical and quasi-Huffman sequences and arrays, scores
//! them, projects them into spectrally equivalent families, synthesises
//! continuum probes, and runs diffuse-PSF imaging experiments with them.
//! Start with the runnable programs under `examples/`.

pub mod cli;
pub mod construct;
pub mod continuum;
pub mod error;
pub mod imaging;
pub mod lattice;
pub mod metrics;
pub mod project;
pub mod rng;

pub use error::{Error, Result};
pub use lattice::{correlate, Tensor};
