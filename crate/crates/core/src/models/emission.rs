use nalgebra::{Cholesky, DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-state Gaussian emission parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianEmission {
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
}

impl GaussianEmission {
    pub fn new(mean: Vector3<f64>, cov: Matrix3<f64>) -> Self {
        GaussianEmission { mean, cov }
    }

    /// Standard 3-d Gaussian at the origin.
    pub fn standard() -> Self {
        GaussianEmission {
            mean: Vector3::zeros(),
            cov: Matrix3::identity(),
        }
    }
}

/// T x L matrix of per-frame, per-state log observation densities.
#[derive(Debug, Clone)]
pub struct ObsLogLik {
    pub ll: DMatrix<f64>,
}

impl ObsLogLik {
    pub fn t_len(&self) -> usize {
        self.ll.nrows()
    }

    pub fn n_states(&self) -> usize {
        self.ll.ncols()
    }

    #[inline]
    pub fn at(&self, t: usize, state: usize) -> f64 {
        self.ll[(t, state)]
    }
}

const LN_2PI: f64 = 1.8378770664093453;

/// Evaluate the multivariate normal log density of every frame under every
/// state's emission. Fails with the state index if a covariance is singular.
pub fn emission_loglik(emissions: &[GaussianEmission], frames: &[Vector3<f64>]) -> Result<ObsLogLik> {
    let t_len = frames.len();
    let n_states = emissions.len();
    let mut ll = DMatrix::zeros(t_len, n_states);
    for (i, em) in emissions.iter().enumerate() {
        let chol = Cholesky::new(em.cov).ok_or_else(|| {
            Error::Numerical(format!("state {i}: emission covariance is not positive definite"))
        })?;
        let l = chol.l();
        let ln_det: f64 = 2.0 * (0..3).map(|k| l[(k, k)].ln()).sum::<f64>();
        let norm = -0.5 * (3.0 * LN_2PI + ln_det);
        for (t, y) in frames.iter().enumerate() {
            let z = l
                .solve_lower_triangular(&(y - em.mean))
                .expect("cholesky factor is nonsingular");
            ll[(t, i)] = norm - 0.5 * z.norm_squared();
        }
    }
    Ok(ObsLogLik { ll })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_at_mean_is_normalizer() {
        let em = GaussianEmission::standard();
        let y = Vector3::zeros();
        let ll = emission_loglik(&[em], &[y]).unwrap();
        assert_relative_eq!(ll.at(0, 0), -1.5 * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn doubling_covariance_drops_peak_by_half_log2_per_dim() {
        let y = Vector3::new(0.4, -1.0, 2.0);
        let narrow = GaussianEmission::new(y, Matrix3::identity());
        let wide = GaussianEmission::new(y, Matrix3::identity() * 2.0);
        let ll = emission_loglik(&[narrow, wide], &[y]).unwrap();
        assert_relative_eq!(
            ll.at(0, 0) - ll.at(0, 1),
            1.5 * 2.0_f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn matches_direct_formula_on_random_instance() {
        // Hand-evaluated density: -0.5 (3 ln 2pi + ln det + quad form).
        let cov = Matrix3::new(2.0, 0.5, 0.1, 0.5, 1.0, 0.0, 0.1, 0.0, 0.8);
        let mean = Vector3::new(1.0, -1.0, 0.5);
        let frames = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 2.0, -1.0),
            Vector3::new(-0.3, 0.7, 0.2),
            Vector3::new(2.5, -2.0, 1.0),
        ];
        let other = GaussianEmission::standard();
        let ll = emission_loglik(
            &[GaussianEmission::new(mean, cov), other],
            &frames,
        )
        .unwrap();

        let inv = cov.try_inverse().unwrap();
        let det = cov.determinant();
        for (t, y) in frames.iter().enumerate() {
            let d = y - mean;
            let quad = (d.transpose() * inv * d)[(0, 0)];
            let expect = -0.5 * (3.0 * LN_2PI + det.ln() + quad);
            assert_relative_eq!(ll.at(t, 0), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_covariance_reports_state() {
        let bad = GaussianEmission::new(Vector3::zeros(), Matrix3::zeros());
        let err = emission_loglik(&[GaussianEmission::standard(), bad], &[Vector3::zeros()])
            .unwrap_err();
        assert!(err.to_string().contains("state 1"));
    }
}
