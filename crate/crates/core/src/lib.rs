//! Heterogeneous phase equilibrium as the lower convex hull of internal-energy
//! surfaces.
//!
//! The pipeline runs from sampled primitive surfaces ([`models`]) through the
//! derived surface ([`hull`]) to coexistence simplices and the generalized
//! phase rule ([`coexistence`]), polytope face counting ([`combinatorics`]),
//! and phase diagrams in extensive, intensive or mixed axes ([`diagrams`]).
//! [`io`] owns the versioned JSON formats and [`cli`] the command-line front end.

pub mod cli;
pub mod coexistence;
pub mod combinatorics;
pub mod diagrams;
pub mod error;
pub mod hull;
pub mod io;
mod linalg;
pub mod models;
pub mod synthetic;

pub use error::{Error, Result};
