//! Numerical construction and verification of warped-product Einstein
//! metrics and their codimension-two Euclidean immersions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too; index loops
// mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod geometry;
pub mod immerse;
pub mod scenario;
pub mod verify;
pub mod warp;

pub use error::{GeomError, Result};
