use nalgebra::Matrix3;
use rand::Rng;
use rand_distr::{Beta, ChiSquared, Distribution, Gamma, StandardNormal};

use super::RngStream;
use crate::error::{Error, Result};

/// Turn stick-breaking proportions into weights.
///
/// `weights[i] = sticks[i] * prod_{l<i} (1 - sticks[l])` for all but the last
/// entry; the last entry absorbs the remaining stick mass so the result sums
/// to 1. One fewer stick than weights is required.
pub fn stick_weights(sticks: &[f64], len: usize) -> Vec<f64> {
    assert_eq!(sticks.len() + 1, len, "need len - 1 stick proportions");
    let mut weights = Vec::with_capacity(len);
    let mut remaining = 1.0;
    for &v in sticks {
        weights.push(v * remaining);
        remaining *= 1.0 - v;
    }
    weights.push(remaining.max(0.0));
    weights
}

/// Draw a truncated GEM(gamma) weight vector of length `l_max`.
///
/// Proportions are Beta(1, gamma); the final weight absorbs the tail of the
/// stick so the vector is an exact element of the simplex.
pub fn sample_gem(gamma: f64, l_max: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::ParamDomain(format!(
            "GEM concentration must be positive and finite, got {gamma}"
        )));
    }
    if l_max == 0 {
        return Err(Error::ParamDomain("GEM truncation must be >= 1".into()));
    }
    let beta = Beta::new(1.0, gamma)
        .map_err(|e| Error::ParamDomain(format!("Beta(1, {gamma}): {e}")))?;
    let sticks: Vec<f64> = (0..l_max - 1).map(|_| beta.sample(rng)).collect();
    Ok(stick_weights(&sticks, l_max))
}

/// Draw from a Dirichlet distribution with concentration vector `alpha`.
///
/// Entries with `alpha[i] == 0` come back exactly 0. Gamma variates for small
/// shapes are drawn in log space so the draw never underflows to an all-zero
/// vector.
pub fn sample_dirichlet(alpha: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    if alpha.iter().any(|&a| a < 0.0 || !a.is_finite()) {
        return Err(Error::ParamDomain(
            "Dirichlet concentrations must be finite and nonnegative".into(),
        ));
    }
    if !alpha.iter().any(|&a| a > 0.0) {
        return Err(Error::ParamDomain(
            "Dirichlet needs at least one positive concentration".into(),
        ));
    }
    let log_draws: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a == 0.0 {
                f64::NEG_INFINITY
            } else {
                ln_gamma_variate(a, rng)
            }
        })
        .collect();
    let max = log_draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_draws.iter().map(|&lg| (lg - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    Ok(scaled.iter().map(|&s| s / total).collect())
}

/// ln of a Gamma(shape, 1) variate; stable for arbitrarily small shapes via
/// the boost `X = Gamma(shape + 1) * U^{1/shape}`.
fn ln_gamma_variate(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 0.3 {
        let g = Gamma::new(shape + 1.0, 1.0).expect("shape + 1 > 0");
        let x: f64 = g.sample(rng);
        let u: f64 = rng.random();
        x.ln() + u.ln() / shape
    } else {
        let g = Gamma::new(shape, 1.0).expect("shape > 0");
        let x: f64 = g.sample(rng);
        x.ln()
    }
}

/// Draw an SPD matrix from the Inverse-Wishart IW(n0, scale).
///
/// Uses the Bartlett factorization of the Wishart of the inverse: with
/// `scale = M Mᵀ` and `A` the Bartlett lower-triangular factor for
/// Wishart(n0, I), the draw is `C Cᵀ` with `C = M A⁻ᵀ`.
pub fn sample_inverse_wishart(
    n0: f64,
    scale: &Matrix3<f64>,
    rng: &mut RngStream,
) -> Result<Matrix3<f64>> {
    let dim = 3.0;
    if !(n0 > dim) {
        return Err(Error::ParamDomain(format!(
            "Inverse-Wishart degrees of freedom must exceed dim = {dim}, got {n0}"
        )));
    }
    let chol = nalgebra::Cholesky::new(*scale).ok_or_else(|| {
        Error::Numerical("Inverse-Wishart scale matrix is not positive definite".into())
    })?;
    let m = chol.l();

    let mut a = Matrix3::<f64>::zeros();
    for i in 0..3 {
        let df = n0 - i as f64;
        let chi = ChiSquared::new(df)
            .map_err(|e| Error::ParamDomain(format!("ChiSquared({df}): {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let a_inv = a
        .solve_lower_triangular(&Matrix3::identity())
        .ok_or_else(|| Error::Numerical("singular Bartlett factor".into()))?;
    let c = m * a_inv.transpose();
    let sigma = c * c.transpose();
    // Symmetrize away floating-point asymmetry.
    Ok((sigma + sigma.transpose()) * 0.5)
}

/// Draw an index proportional to `exp(log_weights)`.
///
/// All `-inf` is a caller bug and panics; at least one finite weight is
/// required.
pub fn sample_categorical_log(log_weights: &[f64], rng: &mut RngStream) -> usize {
    let max = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        max > f64::NEG_INFINITY,
        "categorical draw needs a finite weight"
    );
    let probs: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

/// Chinese-restaurant table count for a cell with `n` customers and
/// concentration `weight`: the sum of Bernoulli(weight / (weight + k - 1))
/// over k = 1..=n. Lies in [1, n] whenever n >= 1.
pub fn crt_table_count(n: usize, weight: f64, rng: &mut RngStream) -> usize {
    if n == 0 {
        return 0;
    }
    if weight <= 0.0 {
        return 1;
    }
    let mut tables = 0usize;
    for k in 0..n {
        let p = weight / (weight + k as f64);
        if rng.random::<f64>() < p {
            tables += 1;
        }
    }
    tables
}
