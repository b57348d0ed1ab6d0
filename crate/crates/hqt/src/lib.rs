//! Hyperbolic quadtrees in the Poincaré half-space model.
//!
//! The crate provides the building blocks for locality-sensitive ordering of
//! points in d-dimensional hyperbolic space:
//!
//! * [`geometry`] — points, isometries and horoboxes in half-space
//!   coordinates, with exact distance and diameter formulas.
//! * [`quadtree`] — the hyperbolic quadtree over a finite point set, plus
//!   cell addressing in the aligned infinite quadtree and per-level cell
//!   geometry (width, height, diameter, fatness, child counts).
//! * [`lorder`] — the L-order point comparator, implemented with fixed-point
//!   bit operations so that a comparison costs O(d) scalar operations.
//! * [`cover`] — the family of 3d+3 shift isometries whose quadtrees jointly
//!   cover every nearby pair of points in a small cell.
//! * [`nnindex`] — a dynamic approximate nearest-neighbour / closest-pair
//!   index built from one ordered collection per shift, together with
//!   brute-force oracles used for validation.
//! * [`oracle`] — slow reference implementations (explicit quadtree descent)
//!   that the test suites compare against.
//!
//! Core math is generic over the scalar type through [`scalar::Scalar`];
//! `f64` aliases are exported at the crate root.

pub mod cover;
pub mod error;
pub mod geometry;
pub mod lorder;
pub mod nnindex;
pub mod oracle;
pub mod quadtree;
pub mod scalar;

pub use error::Error;
pub use scalar::Scalar;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// `f64` point in half-space coordinates.
pub type Pointf = geometry::Point<f64>;
/// `f64` isometry of the half-space model.
pub type Isometryf = geometry::Isometry<f64>;
/// `f64` cube-based horobox.
pub type Horoboxf = geometry::Horobox<f64>;
/// `f64` shift family.
pub type ShiftFamilyf = cover::ShiftFamily<f64>;
/// `f64` neighbour index.
pub type NeighborIndexf = nnindex::NeighborIndex<f64>;
