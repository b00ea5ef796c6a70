//! Simulation and compilation toolkit for liquid-state NMR quantum computing.
//!
//! Spins are indexed from 0 in the API. In the basis ordering spin 0 is the
//! most significant bit and `|0>` precedes `|1>`. Circuit text files and the
//! CLI use 1-based spin labels.

pub mod algorithms;
pub mod compiler;
pub mod decoherence;
pub mod error;
pub mod linalg;
pub mod molecule;
pub mod prep;
pub mod pulse;
pub mod readout;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use spin::{CouplingMode, DensityMatrix, SpinSystem};
