//! Geometry toolkit for pointsets of low fractal dimension.
//!
//! Dimension estimators, sphere separators, separator-based exact solvers
//! (TSP, rectilinear Steiner trees, unit-ball independent set), shifted-grid
//! approximation schemes and a low-pathwidth spanner, each paired with a
//! brute-force oracle. [`harness`] drives them from seeded configurations.
//!
//! With the default `parallel` feature the hot loops run on rayon; building
//! with `--no-default-features` gives an identical sequential build.

pub mod approx;
pub mod error;
pub mod geom;
pub mod harness;
pub mod indset;
pub mod nets;
pub mod par;
pub mod pathdecomp;
pub mod pointgen;
pub mod regression;
pub mod rsmt;
pub mod separator;
mod spatial;
pub mod spanner;
pub mod tsp;

pub use error::{Error, Result};
pub use geom::{Ball, Norm, Point, Segment, Side, Sphere, Tolerance};
pub use pointgen::{generate, GeneratorSpec, PointSet};
