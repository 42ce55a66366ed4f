//! Pseudo-spectral solver for the three-dimensional chemotaxis-Navier-Stokes
//! system on a periodic box, together with the local diagnostics used to
//! study partial regularity of its suitable weak solutions.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod interp;
pub mod pressure;
pub mod regularity;
pub mod report;
pub mod sampling;
pub mod scaling;
pub mod snapshot_io;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GradPhi, Grid, ParabolicCylinder, ScalarField, SnapshotSeries, State, VectorField};
