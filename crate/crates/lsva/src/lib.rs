//! Asymptotic implied-volatility and price expansions for one- and
//! two-factor local-stochastic volatility models.
//!
//! The library builds N-th order corrections to Black-Scholes prices,
//! transition densities, and implied volatilities by expanding the pricing
//! generator around the query point, propagating the correction operators
//! through exact exponential-polynomial time integrals, and collapsing the
//! result onto closed-form Gaussian derivative ratios. Four model families
//! are wired in (CEV, Heston, 3/2, SABR), together with the exact and
//! semi-exact reference pricers and competitor approximations needed to
//! measure accuracy:
//!
//! - CEV: noncentral chi-squared series price, Hagan-Woodward expansion;
//! - Heston: Fourier pricer on a shifted contour, Forde-Jacquier-Lee
//!   small-time expansion;
//! - 3/2: confluent-hypergeometric characteristic function and Fourier
//!   pricer;
//! - SABR (zero correlation): hyperbolic-kernel double-integral price,
//!   Hagan-Kumar-Lesniewski-Woodward formula;
//! - all models: seeded antithetic Monte Carlo.
//!
//! Runnable walkthroughs live in the crate `examples/` directory
//! (`cargo run --release --example smile`, `... --example convergence`, and
//! friends); the thin `lsva` binary exposes the same capabilities as batch
//! subcommands emitting plot-ready CSV or JSON tables.
//!
//! Module map:
//!
//! - [`timefunc`]: the exponential-polynomial ring all time integrals live in;
//! - [`opalgebra`]: normal-ordered operator algebra and the nested-integral
//!   expansion reducing corrections to derivative weights;
//! - [`blackscholes`]: Black-Scholes prices, Hermite ratios, vega-derivative
//!   ratios, implied-volatility inversion;
//! - [`models`]: coefficient jets of the four model families;
//! - [`ivexpansion`]: assembly of price corrections, implied-volatility
//!   corrections, and density approximations;
//! - [`reference`]: exact/semi-exact pricers, Monte Carlo, competitor
//!   expansions, special functions, quadrature;
//! - [`cli`]: run configuration, batch commands, CSV/JSON emission.

pub mod blackscholes;
pub mod error;
pub mod ivexpansion;
pub mod models;
pub mod opalgebra;
pub mod reference;
pub mod timefunc;
pub(crate) mod util;

pub use error::{LsvaError, Result};
