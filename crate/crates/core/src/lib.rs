//! Exact computational engine for real Bott manifolds.
//!
//! A real Bott manifold is the total space of an iterated real projective
//! line bundle; it is encoded here by a strictly upper triangular binary
//! matrix. The crate decides diffeomorphism of these manifolds by deciding
//! graded-ring isomorphism of their mod 2 cohomology rings, classifies all
//! manifolds of a given dimension, models their fundamental groups as affine
//! motions of Euclidean space, and computes the small group cohomology
//! behind the extension theory of those groups.

pub mod classify;
pub mod cohomology;
pub mod group;
pub mod matrix;
pub mod report;
pub mod ring;
pub mod snf;

pub use classify::{classify_dimension, classify_dimension_with, Classification, IsoClass};
pub use matrix::{enumerate_all, BottMatrix, MatrixError, Permutation, TypeSignature, MAX_DIM};
pub use ring::{
    bruteforce_isomorphism, find_isomorphism, is_isomorphism, multiply, relation_image,
    witness_necessary_conditions, GeneratorMap, Ring, RingElement, RingError,
};
