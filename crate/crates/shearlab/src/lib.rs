//! Linearized shear-flow toolkit: Airy and Orr-Sommerfeld resolvents, spectral
//! representation of the linear evolution, and Gevrey-weighted diagnostics.

pub mod airy;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod grid;
pub mod numerics;
pub mod orr_sommerfeld;
pub mod profile;
pub mod semigroup;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
