//! Special functions and zero sequences used by the density catalog.

pub mod airy;
pub mod bessel;
pub mod cache;
pub mod gamma;
pub mod pcf;
pub mod zeros;

pub use airy::{airy_ai, airy_ai_prime};
pub use bessel::{bessel_i, bessel_i_scaled, bessel_j, bessel_j_pair, bessel_k, bessel_k_scaled};
pub use pcf::{pcf_d, pcf_d_at_zero, pcf_d_nu_derivative, pcf_d_nu_derivative_scaled, pcf_d_scaled, Scaled};
pub use gamma::{gamma, ln_gamma, rgamma};

pub use zeros::{airy_zeros, bessel_j_zeros, pcf_nu_zeros, ZeroFamily, ZeroTable};
