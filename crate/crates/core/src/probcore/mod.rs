//! Random-variate sampling, density evaluation, conjugate posterior updates,
//! and univariate distribution fitting used by the inference and thresholding
//! code.

mod fitting;
mod niw;
mod rng;
mod sampling;

pub use fitting::{fit_distribution, percentile, Family, FittedDist};
pub use niw::{niw_posterior, sample_gaussian_params, EmissionMode, NIWPrior};
pub use rng::RngStream;
pub use sampling::{
    crt_table_count, sample_categorical_log, sample_dirichlet, sample_gem,
    sample_inverse_wishart, stick_weights,
};
