//! Thermodynamic formalism for planar piecewise smooth vector fields.
//!
//! The crate builds the `Z_k` polynomial family and the petal systems, integrates
//! their trajectories on the invariant sets with explicit branch choices at the
//! two-folds, codes trajectories as itineraries over the arc partition, and turns
//! the resulting subshifts into Ruelle-Perron-Frobenius transfer matrices whose
//! spectral radius gives the topological pressure of the geometric potential.
//! The generalized tent map and the central Cantor sets close the loop between
//! entropy `log alpha` and Hausdorff dimension.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command line
//! live in the `psvf-tools` crate.

#![no_std]

extern crate alloc;

pub mod dimension;
mod error;
pub mod flow;
mod math;
pub mod model;
pub mod poly;
pub mod symbolic;
pub mod tent;
pub mod transfer;

pub use error::{Error, Result};
pub use flow::{BranchPolicy, Trajectory};
pub use model::{BoundaryClass, Family, PlanarField, Psvf, Side, SystemSpec};
pub use poly::Polynomial;
pub use symbolic::{ArcPartition, Itinerary, TransitionGraph};
pub use transfer::{SpectralResult, TransferMatrix};
