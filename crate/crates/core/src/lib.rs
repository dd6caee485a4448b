//! Modified Schouten tensors, σ₂-cone algebra and conformal continuation on
//! discretized closed 3-manifolds.
//!
//! The crate is `no_std` with `alloc`. Geometry lives on a [`grid::ChartGrid`]
//! (a periodic box or a symmetry-reduced band of the round 3-sphere); all
//! operations are pure functions from fields to fields.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod conformal;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod grid;
pub mod linalg;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{ChartGrid, ChartKind, MetricField, ScalarField, SymTensorField};
pub use linalg::Sym3;
