//! Projection methods for the convex feasibility problem over
//! intersections of ellipsoids.
//!
//! The crate provides two families of iterations built from per-set
//! projections and separating cuts (a polyhedral outer-approximation
//! method and its inexact variant using single-cut approximate
//! projections), alongside classical competitors (cyclic projections,
//! simultaneous averaged projections, and two circumcenter schemes) for
//! benchmarking. Supporting pieces: dense SPD linear algebra, exact and
//! approximate ellipsoid projectors, a small polyhedral QP solver, a
//! circumcenter solver for possibly degenerate point sets, and a
//! deterministic instance generator with a versioned text format.

pub mod circumcenter;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod methods;
pub mod poly;
pub mod rng;
pub mod sets;

pub use error::CoreError;
pub use linalg::{SpdMatrix, TriangularFactor, Vector};
pub use sets::{ConvexSet, Ellipsoid, HalfSpace};
