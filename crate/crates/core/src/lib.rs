//! Verification laboratory for the spherical and centered maximal operators
//! on the infinite rooted k-ary tree.
//!
//! The crate computes sphere and ball averages, the maximal operators `M∘`
//! and `M`, weighted norms, and the weight conditions used to decide
//! weighted weak and strong type bounds. Everything that can be exact is
//! exact: vertex counts are closed forms, power weights keep rational
//! exponents, and operator code is generic over [`Scalar`] so the same
//! routines run in `f64` and in [`Rational`].

pub mod conditions;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod geometry;
pub mod logk;
pub mod operators;
pub mod oracle;
pub mod scalar;
pub mod selftest;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{distance, SphereLevelSlice, TreeParams, Vertex};
pub use operators::{Geometry, LevelFunction, Maximum, SparseFunction, TestFunction};
pub use scalar::Scalar;
pub use weights::{dual_weight, Exponent, LevelWeight, LevelWeightPair, Weight, WeightPair};

/// Exact rational scalar used by the oracle paths.
pub type Rational = num_rational::BigRational;

pub type LevelFunctionF64 = LevelFunction<f64>;
pub type SparseFunctionF64 = SparseFunction<f64>;
pub type ExactLevelFunction = LevelFunction<Rational>;
pub type ExactSparseFunction = SparseFunction<Rational>;
