//! Jacobi sets of two scalar fields on regular 2D grids.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`jacobi::extract_critical_edges`] finds the PL-critical edges of the
//!    grid triangulation and places one local bilinear Jacobi set point per
//!    critical edge;
//! 2. [`connectivity`] links those points, either pairwise around every mesh
//!    vertex (the nerve 1-skeleton) or with the reduced star-to-barycenter
//!    construction;
//! 3. [`simplicial`] provides collapses, nerves and GF(2) Betti numbers used
//!    to check that the drawings keep the homotopy type of the PL Jacobi set.

pub mod connectivity;
pub mod fields;
pub mod jacobi;
pub mod mesh;
pub mod simplicial;

pub use connectivity::{JacobiGraph, ReductionStats};
pub use fields::{GaussianMixtureSpec, NoiseSpec, ScalarGrid};
pub use jacobi::{CriticalEdgeRecord, DegreeReport, KappaPair};
pub use mesh::{Point2, Triangulation};
pub use simplicial::{CollapseTrace, Simplex, SimplicialComplex};
