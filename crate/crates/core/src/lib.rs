//! Weak values, entangled pre/postselection and joint-measurement inference.
//!
//! Tensor products throughout use system-major lexicographic order: the basis
//! state `|i>|j>` of a `d_s x d_a` space has index `i * d_a + j`.

pub mod error;
pub mod jointmeas;
pub mod kernel_continuum;
pub mod nogo;
pub mod qlinalg;
pub mod weakcore;
pub mod weyl_discrete;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
