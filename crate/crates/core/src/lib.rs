//! Numerical laboratory for the weight-`k`, index-`m` Poincare series on
//! `SL2(Z)`: Fourier coefficients through Kloosterman-Bessel sums, values,
//! Petersson norms, mass densities, spectral inner products and zeros.

pub mod arithmetic;
pub mod cache;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod quadrature;
pub mod poincare;
pub mod special;
pub mod spectral;
pub mod zeros;

pub use error::{Error, Result};
