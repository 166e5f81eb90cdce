//! Multilinear trace inequalities for Hermitian tensors under the Einstein product.

pub mod ensembles;
pub mod error;
pub mod inequalities;
pub mod pinching;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod spectral;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{DenseTensor, Shape};
