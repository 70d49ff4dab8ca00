//! Double Hopf bifurcation analysis for two-component reaction-diffusion
//! systems with a spatial-average nonlocal term on (0, ℓπ) with Neumann
//! boundary conditions.
//!
//! The pipeline runs `model` → `linstab` → `eigen` → `normalform` →
//! `amplitude`, and `pdesim` checks the predictions by direct simulation.

// `!(x > 0.0)` is meant to reject NaN; tensor loops read better indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod amplitude;
pub mod eigen;
pub mod error;
pub mod linalg;
pub mod linstab;
pub mod model;
pub mod normalform;
pub mod pdesim;
pub mod spectral;

pub use error::{Error, Result};
