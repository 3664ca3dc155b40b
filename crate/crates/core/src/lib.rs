//! Cone-adapted shearlet coefficients computed directly in frequency and
//! from affine Radon data.

pub mod cone_frame;
pub mod corpus;
mod dft;
pub mod error;
pub mod export;
pub mod grid;
pub mod group;
pub mod io;
pub mod par;
pub mod radon;
pub mod radon_route;
pub mod shearlet;
mod vquad;
pub use vquad::PositionRead;
pub mod wavelet;

pub use error::{Error, Result};
pub use grid::{
    dft1_forward, dft1_inverse, dft2_forward, dft2_inverse, inner_product, relative_l2, Grid1D,
    QuadratureKind, QuadratureRule, SampledSignal2D, Signal1D, Spectrum2D,
};
pub use num_complex::Complex64;
pub use par::Execution;
