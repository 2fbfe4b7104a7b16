//! Isotropic randomization tests for Fréchet means on metric spaces.

pub mod cli;
pub mod error;
pub mod frechet;
pub mod geometry;
pub mod harness;
pub mod inference;
pub mod io;
pub mod isotropy;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use frechet::{frechet_mean, frechet_objective, frechet_variance, FrechetEstimate};
pub use geometry::{Point, Space, Tangent};
