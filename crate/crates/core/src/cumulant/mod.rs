//! Large deviations of `Re e^{-i alpha} eta_m(sigma, X)`: local moment-generating
//! functions, the cumulant-generating function, the saddle point, tail
//! probabilities and the constants `g_n(sigma)`, `A_m(sigma)`.

mod engine;
mod gn;
mod local;
mod mellin;
mod saddle;

pub use engine::{cumulant, CumulantEngine, CumulantValue};
pub use gn::{
    a_m, a_sigma, c_m, cumulant_asymptotic, cumulant_asymptotic_with, falling_factor, gn_quadrature, GnTable,
    DEFAULT_KAPPA_FLOOR,
};
pub use local::{log_mgf_local, log_mgf_local_saddle, log_mgf_local_saddle_main, mgf_local, mgf_local_saddle};
pub use mellin::{mellin_smoothing_bracket, mellin_smoothing_bracket_with, MellinBracket};
pub use saddle::{
    kappa_asymptotic, solve_saddle, solve_saddle_with, tail_asymptotic, tail_saddle, tail_saddle_with, tilted_density,
    tilted_density_at, SaddleOptions, SaddleResult, TailAsymptotic, TiltedDensity,
};
