//! Curvature-plus-density shape codec.
//!
//! A genus-0 or disk-like triangle mesh is conformally mapped to the sphere
//! or the unit disk, and two scalar fields are recorded there: the mean
//! curvature half-density `h = H|df|` and the log vertex density of the
//! parameterization. Reconstruction remeshes the domain by a density-driven
//! centroidal Voronoi tessellation and recovers the immersion by a sequence
//! of spin transformations solved from a regularized quaternionic Dirac
//! eigenproblem, followed by an optional area calibration.

pub mod error;
pub mod mesh;
pub mod quat;
pub mod sparse;
pub mod spin;
pub mod areacal;
pub mod confmap;
pub mod codec;
pub mod cvt;
pub mod pipeline;

pub use error::{Error, Result};
pub use mesh::TriMesh;
pub use quat::Quaternion;
