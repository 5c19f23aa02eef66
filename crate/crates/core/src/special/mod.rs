//! Special functions evaluated in log space.

pub mod bessel_j;
pub mod bessel_k;
pub mod dd;
pub mod envelope;
pub mod gamma;
pub mod logscalar;
pub(crate) mod mp;
pub mod zeta;

pub use bessel_j::{bessel_j_log, bessel_j_with_error};
pub use bessel_k::{bessel_k_imag, bessel_k_imag_log};
pub use envelope::{envelope_f, envelope_g, EnvelopeParams};
pub use gamma::{log_gamma, log_gamma_complex};
pub use logscalar::{LogComplex, SignedLogReal};
pub use zeta::{xi, zeta, zeta_line};
