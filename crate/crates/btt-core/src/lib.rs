//! Exact arithmetic for lattices over discrete valuation rings, additive
//! norms (points of extended Bruhat-Tits buildings of general linear
//! groups), the rank-2 tree, rational polyhedral complexes, and piecewise
//! affine maps from such complexes into the building.
//!
//! Everything is computed over one of two interchangeable backends: the
//! rationals with a p-adic valuation, or rational functions with the
//! t-adic valuation. No floating point is used anywhere.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod field;
pub mod latnorm;
pub mod matrix;
pub mod pamap;
pub mod poly;
pub mod polyhedral;
pub mod tree;

#[doc(hidden)]
pub mod testsupport;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
