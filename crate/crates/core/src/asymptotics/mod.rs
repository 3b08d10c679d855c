//! Closed-form limit laws and bounds for QoE estimators.
//!
//! * [`sigma_alpha`]: covariance of the normalised component-wise QoE under
//!   a Gaussian or Brownian limit of the block estimator;
//! * [`ols_gamma`], [`brownian_qoe_cov`]: the median special cases for
//!   least squares and Brownian paths;
//! * [`c_nu`], [`psi`], [`concentration_bound`]: finite-`k` deviation bounds
//!   for geometric quantiles.

mod bounds;
mod covariance;
mod normal;

pub use bounds::{c_nu, concentration_bound, psi, ConcentrationParams};
pub use covariance::{brownian_qoe_cov, ols_gamma, sigma_alpha, LimitLaw};
pub use normal::{
    bivariate_normal_upper, gaussian_orthant, std_normal_cdf, std_normal_pdf, std_normal_quantile,
};
