//! Super-resolution fields: smooth random fields built from lattice data,
//! the Riemannian geometry they induce on voxel manifolds, Lipschitz–Killing
//! curvature estimation and familywise-error thresholds from the expected
//! Euler characteristic.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod jets;
pub mod kernel;
pub mod lattice;
pub mod lkc;
pub mod manifold;
pub mod surf;
pub mod tensor;

pub use error::{Error, Result};
