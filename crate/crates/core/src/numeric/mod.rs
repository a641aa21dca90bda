//! Small numerical kernels shared by the rest of the crate: adaptive
//! quadrature, bracketed root finding and monotone interpolation.

pub mod interp;
pub mod quad;
pub mod roots;

pub use interp::MonotoneCubic;
pub use quad::{integrate, integrate_with, Integral, QuadOptions};
pub use roots::{brent, find_bracket_up, Bracket};
