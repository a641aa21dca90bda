//! First-passage-time toolkit for diffusions with the time inversion property.
//!
//! The crate transports crossing-time densities of Brownian motion and Bessel
//! processes along the one-parameter curve family
//! `f ↦ (1 + βt) f(t / (1 + βt))`, evaluates a catalog of closed-form and
//! spectral crossing densities, solves method-of-images problems, computes
//! large-time asymptotics and checks all of it against a Monte Carlo oracle.
//!
//! Module map:
//!
//! * [`moebius`]: curve algebra, lifetimes and the deterministic time map.
//! * [`specfun`]: Bessel, Airy and parabolic cylinder functions and their zeros.
//! * [`catalog`]: closed-form and series crossing densities, transition densities.
//! * [`identity`]: the density transport engine and its Radon–Nikodym factor.
//! * [`images`]: method of images.
//! * [`asymptotics`]: integral test for transience and large-time approximants.
//! * [`mcsim`]: Monte Carlo path and bridge simulation.

pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod identity;
pub mod images;
pub mod mcsim;
pub mod moebius;
pub mod numeric;
pub mod specfun;

pub use error::{Error, Result};
