pub mod banded;
pub mod coupled;
pub mod dense;
pub mod expm;
pub mod interp;
pub mod lanczos;
pub mod poisson;
pub mod quad;
pub mod special;
