//! Billiard trajectories in convex hypersurfaces.
//!
//! Two halves that meet in the middle:
//!
//! * a numerical half ([`geometry`], [`configspace`], [`solver`], [`oracle`])
//!   that finds billiard trajectories between two points of a sphere or
//!   ellipsoid as critical points of a length functional, classifies them by
//!   Morse index, and checks the counts against topological lower bounds;
//! * an exact half ([`field`], [`dga`], [`leray`]) that computes the
//!   cohomological invariants behind those bounds: a finite differential
//!   graded algebra whose cohomology carries the cup products and cup-length
//!   estimates that force critical points to exist.

pub mod configspace;
pub mod dga;
pub mod field;
pub mod geometry;
pub mod leray;
pub mod linalg;
pub mod oracle;
pub mod solver;
