//! Kolmogorov goodness-of-fit testing against alternatives that approach the
//! uniform hypothesis: Haar-coefficient density alternatives, CDF bumps,
//! exact and asymptotic null laws, Brownian-bridge experiments, consistency
//! classification and Monte Carlo power studies.

pub mod besov;
pub mod classifier;
pub mod error;
pub mod gaussian;
pub mod ks;
pub mod model;
pub mod power;
pub mod rng;
pub mod wavelet;

pub use error::{Error, Result};
