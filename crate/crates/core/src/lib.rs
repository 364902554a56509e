//! Iterated graph systems, their graph towers, and discrete p-modulus.
//!
//! The crate builds towers `G_1, G_2, …` from an iterated graph system
//! (a base graph with gluing maps), computes p-capacities, optimal
//! densities and flows on the resulting graphs, and certifies structural
//! properties such as conductive uniformity, the conformal dimension `Q*`,
//! walk dimensions, removable edges and finite-level porosity.

pub mod error;
pub mod analysis;
pub mod checks;
pub mod graph;
pub mod igs;
pub mod io;
pub mod modulus;
pub mod neighborhood;
pub mod tower;

pub use error::{Error, Result};
