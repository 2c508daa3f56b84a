//! Numerical laboratory for the generalized Ricci flow on Lie groups,
//! working directly on structure constants.

pub mod catalog;
pub mod cli;
pub mod courant;
pub mod error;
pub mod flow;
pub mod io;
pub mod liealg;
pub mod multilinear;
pub mod sample;
pub mod soliton;

pub use error::{Error, Result};
