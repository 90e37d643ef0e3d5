//! Sparse identification of discrete-time dynamical models from trajectory
//! data, using delta-rank truncation of Hankel-type trajectory matrices to
//! control noise sensitivity.

pub mod datagen;
pub mod dictionary;
pub mod error;
pub mod io;
pub mod linalg;
pub mod obstruction;
pub mod ode;
pub mod sdsi;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use linalg::{c64, DenseMatrix};
