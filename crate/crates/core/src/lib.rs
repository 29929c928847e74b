//! Value distribution of iterated integrals of `log zeta` on vertical lines.
//!
//! The random Euler model `eta_m(sigma, X) = sum_p Li_{m+1}(p^{-sigma} X(p)) / (log p)^m`
//! is studied through its characteristic function and density ([`charfun`]),
//! its cumulant-generating function and saddle-point tails ([`cumulant`]),
//! Monte Carlo samples ([`random_model`]) and the deterministic Dirichlet
//! polynomials it models ([`zeta_line`]).

pub mod arith;
pub mod charfun;
pub mod cumulant;
pub mod dd;
pub mod error;
pub mod model;
pub mod quad;
pub mod random_model;
pub mod specfun;
pub mod stats;
pub mod zeta_line;

pub use error::{Error, Result};
pub use model::{ModelPoint, Truncation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
