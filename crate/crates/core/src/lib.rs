//! Polar decompositions in quaternion indefinite inner product spaces.

pub mod canonical;
pub mod error;
pub mod gen;
pub mod indefinite;
pub mod polar;
pub mod sqroot;
pub mod quat;
pub mod tolerance;
pub mod witt;

pub use error::{Error, ErrorClass, Result};
pub use quat::{conj_transpose, omega_embed, omega_extract, quat_product, QMatrix, Quaternion};
pub use tolerance::Tolerance;
