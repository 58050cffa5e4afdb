use nalgebra::{Cholesky, Matrix3, Vector3};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{sample_inverse_wishart, RngStream};
use crate::error::{Error, Result};

/// Normal–Inverse-Wishart prior over a 3-d Gaussian's (mean, covariance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NIWPrior {
    /// Prior mean of the Gaussian mean.
    pub mean0: Vector3<f64>,
    /// Confidence in `mean0` (pseudo-observations).
    pub kappa0: f64,
    /// Inverse-Wishart degrees of freedom.
    pub n0: f64,
    /// Inverse-Wishart scale matrix, symmetric positive definite.
    pub s0: Matrix3<f64>,
}

/// Whether the per-state Gaussian mean is learned or clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmissionMode {
    /// Draw the mean from its NIW conditional.
    LearnedMean,
    /// Clamp the mean at zero and draw only the covariance.
    FixedZeroMean,
}

impl NIWPrior {
    pub fn new(mean0: Vector3<f64>, kappa0: f64, n0: f64, s0: Matrix3<f64>) -> Result<Self> {
        if !(kappa0 > 0.0) {
            return Err(Error::ParamDomain(format!(
                "NIW kappa0 must be positive, got {kappa0}"
            )));
        }
        if !(n0 >= 4.0) {
            return Err(Error::ParamDomain(format!(
                "NIW degrees of freedom must be >= dim + 1 = 4, got {n0}"
            )));
        }
        if Cholesky::new(s0).is_none() {
            return Err(Error::Numerical("NIW scale is not positive definite".into()));
        }
        Ok(NIWPrior {
            mean0,
            kappa0,
            n0,
            s0,
        })
    }
}

/// Conjugate Normal–Inverse-Wishart update.
///
/// Empty data returns the prior unchanged.
pub fn niw_posterior(prior: &NIWPrior, data: &[Vector3<f64>]) -> NIWPrior {
    let n = data.len();
    if n == 0 {
        return prior.clone();
    }
    let nf = n as f64;
    let mut sum = Vector3::zeros();
    for x in data {
        sum += x;
    }
    let sample_mean = sum / nf;
    let mut scatter = Matrix3::zeros();
    for x in data {
        let d = x - sample_mean;
        scatter += d * d.transpose();
    }
    let kappa_n = prior.kappa0 + nf;
    let mean_n = (prior.kappa0 * prior.mean0 + nf * sample_mean) / kappa_n;
    let dev = sample_mean - prior.mean0;
    let s_n = prior.s0 + scatter + (prior.kappa0 * nf / kappa_n) * (dev * dev.transpose());
    NIWPrior {
        mean0: mean_n,
        kappa0: kappa_n,
        n0: prior.n0 + nf,
        s0: (s_n + s_n.transpose()) * 0.5,
    }
}

/// Draw Gaussian parameters from a Normal–Inverse-Wishart distribution.
///
/// `LearnedMean` draws `cov ~ IW(n0, s0)` then `mean ~ N(mean0, cov / kappa0)`.
/// `FixedZeroMean` conditions the NIW joint on `mean = 0`, which gives
/// `cov ~ IW(n0 + 1, s0 + kappa0 * mean0 mean0ᵀ)` and returns a zero mean.
pub fn sample_gaussian_params(
    posterior: &NIWPrior,
    mode: EmissionMode,
    rng: &mut RngStream,
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    match mode {
        EmissionMode::LearnedMean => {
            let cov = sample_inverse_wishart(posterior.n0, &posterior.s0, rng)?;
            let chol = Cholesky::new(cov / posterior.kappa0)
                .ok_or_else(|| Error::Numerical("sampled covariance not positive definite".into()))?;
            let z = Vector3::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
            let mean = posterior.mean0 + chol.l() * z;
            Ok((mean, cov))
        }
        EmissionMode::FixedZeroMean => {
            let scale = posterior.s0
                + posterior.kappa0 * (posterior.mean0 * posterior.mean0.transpose());
            let cov = sample_inverse_wishart(posterior.n0 + 1.0, &scale, rng)?;
            Ok((Vector3::zeros(), cov))
        }
    }
}
