//! Planning and simulation toolkit for double-upconversion qubit drive chains.
//!
//! The crate is organised the way the signal flows:
//!
//! * [`spectra`]: tones, spectra, mixing products and spur metrics.
//! * [`responses`]: filter transmission models (analytic prototypes, Touchstone data).
//! * [`microstrip`]: line models, parallel-coupled filter synthesis and analysis.
//! * [`chain`]: the two-mixer chain, LO planning, dBc sweeps and leakage.
//! * [`qubit`]: two-level-system experiments driven by a chain spectrum, plus curve fits.
//!
//! The `upconv` binary wraps all of it; see [`cli`].

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod error;
pub mod microstrip;
pub mod qubit;
pub mod responses;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use units::Level;
