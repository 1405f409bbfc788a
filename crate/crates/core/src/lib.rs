//! Numerical machinery for irregular Gabor and wavelet frames.
//!
//! Signals and their continuous Gabor and wavelet transforms, reproducing
//! kernels and their local maximal functions, point-set geometry in the plane
//! and the hyperbolic half-plane, and explicit frame-bound certificates for
//! sampling sets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod pointsets;
pub mod signals;
pub mod transforms;

pub use error::{Error, Result};
pub use geometry::{Geometry, GroupElement, PhasePoint};
pub use num_complex::Complex64;
pub use signals::{Descriptor, QuadratureSpec, Scheme, Signal};
