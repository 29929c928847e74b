//! Special functions: polylogarithms, `I_0` and `log I_0`, the angular
//! function `lambda_r` and the Beurling-Selberg kernels.

pub mod bessel;
pub mod beurling_selberg;
pub mod lambda;
pub mod polylog;

pub use bessel::{bessel_i0, log_i0, log_i0_real, RealBessel};
pub use beurling_selberg::{bs_f, bs_kernel, smoothed_indicator, BSParams, Kernel, SmoothedIndicator};
pub use lambda::{lambda, lambda_zeros, LambdaZeros};
pub use polylog::{eta_local, polylog, zeta_int};
