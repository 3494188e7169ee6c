//! Closed vortex filaments driven by a regularized Biot–Savart field, with the defining line
//! integrals computed as Young integrals or level-2 rough-path integrals over controlled loops.
//!
//! Every numerical type is generic over [`Scalar`] (`f32` or `f64`); the aliases at the crate
//! root fix `f64`.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod loops;
pub mod rough;
pub mod scalar;
pub mod young;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` forms of the generic types.
pub type Real = f64;
pub type Vector3 = geometry::Vec3<f64>;
pub type Matrix3 = geometry::Mat3<f64>;
pub type Loop = geometry::SampledLoop<f64>;
pub type Rough = rough::RoughLoop<f64>;
pub type Controlled = rough::ControlledLoop<f64>;
pub type Kernel = kernel::KernelField<f64>;
pub type State = dynamics::EvolutionState<f64>;
pub type Config = dynamics::EvolveConfig<f64>;
