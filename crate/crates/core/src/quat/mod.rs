//! Quaternion scalars, matrices, the complex embedding and dense linear algebra.

pub mod linalg;
pub mod matrix;
pub mod omega;
pub mod scalar;
pub mod spectrum;

pub use matrix::{conj_transpose, QMatrix};
pub use omega::{omega_embed, omega_extract, ComplexMatrix};
pub use scalar::{quat_product, Quaternion};
