//! Numerical primitives shared by every other module: the standard normal
//! distribution, Gaussian quadrature rules and a counter-based random source.

pub mod normal;
pub mod quadrature;
pub mod rng;

pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use quadrature::{gauss_hermite_rule, QuadratureRule, DEFAULT_ORDER};
pub use rng::RandomSource;
