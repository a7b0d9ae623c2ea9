//! Broadband squeezed vacuum in two pictures.
//!
//! The quantum engine evaluates closed-form correlators of the gated
//! squeezed field. The stochastic-field engine synthesizes classical
//! complex Gaussian zero-point noise, amplifies it with the same
//! Bogoliubov gain functions, and estimates the same correlators by Monte
//! Carlo. Vacuum subtraction ("renormalization") compares the two.
//!
//! Frequencies live on a uniform odd-sized [`lattice::FrequencyLattice`];
//! all integrals use the `dω/2π` measure.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlator;
pub mod error;
pub mod gain;
pub mod gate;
pub mod lattice;
pub mod numeric;
pub mod observables;
pub mod qt_engine;
pub mod quads;
pub mod sf_engine;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use gain::{GainConvention, GainParams, GainProfile};
pub use gate::GateKernel;
pub use lattice::FrequencyLattice;

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
