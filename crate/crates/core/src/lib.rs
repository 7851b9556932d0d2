//! Implicit reconstruction of a smooth m-dimensional manifold in R^d from a
//! uniform sample with approximate tangent frames.
//!
//! The reconstruction is the zero set of a vector field `phi: R^d -> R^(d-m)`
//! built from a compactly supported weight, a weighted tangent covariance and
//! its eigen-split into an approximate normal space. Points near the sample are
//! moved onto the zero set by an iterative projection operator.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line front end live in the `zeroset` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod manifold;
pub mod metrics;
pub mod projector;
pub mod rng;
pub mod sampling;
pub mod weights;

pub use error::{Error, Result};
pub use field::{evaluate, EvalResult, LocalFit, Support};
pub use linalg::{Frame, Matrix, SymmetricSpectrum};
pub use manifold::{Shape, SyntheticManifold};
pub use projector::{project, step, ProjectionOptions, ProjectionStatus, ProjectionTrace};
pub use sampling::{FrameMode, Region, SampleCloud};
pub use weights::WeightParams;
