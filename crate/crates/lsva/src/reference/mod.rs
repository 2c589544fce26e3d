//! Reference pricers, competitor expansions, and the numerics they need.
//!
//! Everything in this module tree is an oracle: slower, independent
//! computations (exact series, Fourier integrals, double integrals, Monte
//! Carlo) and published competitor approximations used to measure the
//! accuracy of the expansion engine, never used inside it.

pub mod cev;
pub mod fourier;
pub mod heston;
pub mod quad;
pub mod sabr;
pub mod specfun;
pub mod three_halves;
