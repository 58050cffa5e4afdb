use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Continuous, ContinuousCDF, Gamma, Normal, StudentsT};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::mathutil::trigamma;

/// Distribution families used for variable thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Normal,
    Beta,
    StudentT,
    Gamma,
}

/// Affine map `x = offset + scale * y` between original data and the support
/// the family was fit on. Identity for Normal and Student-t.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Rescale {
    pub offset: f64,
    pub scale: f64,
}

impl Rescale {
    const IDENTITY: Rescale = Rescale {
        offset: 0.0,
        scale: 1.0,
    };

    #[inline]
    fn to_internal(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    #[inline]
    fn to_original(&self, y: f64) -> f64 {
        self.offset + self.scale * y
    }
}

/// Maximum-likelihood fit of one family to a univariate sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedDist {
    pub family: Family,
    /// Family-specific parameters on the internal support:
    /// Normal `[mean, std]`, Gamma `[shape, rate]`, Beta `[alpha, beta]`,
    /// StudentT `[location, scale, df]`.
    pub params: Vec<f64>,
    /// Support map applied before fitting Beta/Gamma.
    pub rescale: Rescale,
    /// Log-likelihood at the optimum on the original data, including the
    /// Jacobian of the support map.
    pub loglik: f64,
}

const BOUND_EPS: f64 = 1e-6;

/// Fit `family` to `data` by maximum likelihood.
///
/// Beta data is affinely mapped to `[eps, 1-eps]` from the observed min/max;
/// Gamma data that touches zero or below is shifted to positive support. The
/// reported log-likelihood is on the original scale.
pub fn fit_distribution(data: &[f64], family: Family) -> Result<FittedDist> {
    if data.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "need at least 10 samples to fit, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return Err(Error::FitFailed("zero-variance sample".into()));
    }
    match family {
        Family::Normal => fit_normal(data),
        Family::Gamma => fit_gamma(data, lo, hi),
        Family::Beta => fit_beta(data, lo, hi),
        Family::StudentT => fit_student_t(data),
    }
}

/// Inverse CDF of a fitted distribution at percentile `p` in (0, 100).
pub fn percentile(dist: &FittedDist, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 100.0) {
        return Err(Error::ParamDomain(format!(
            "percentile must lie in (0, 100), got {p}"
        )));
    }
    let q = p / 100.0;
    let guess = dist.inverse_cdf_internal(q);
    // Refine by bisection on the family CDF down to machine precision.
    let (mut lo, mut hi) = bracket(|y| dist.cdf_internal(y), q, guess);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if dist.cdf_internal(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(dist.rescale.to_original(0.5 * (lo + hi)))
}

fn bracket(cdf: impl Fn(f64) -> f64, q: f64, guess: f64) -> (f64, f64) {
    let mut step = guess.abs().max(1.0);
    let mut lo = guess;
    let mut hi = guess;
    while cdf(lo) > q {
        lo -= step;
        step *= 2.0;
    }
    step = guess.abs().max(1.0);
    while cdf(hi) < q {
        hi += step;
        step *= 2.0;
    }
    (lo, hi)
}

impl FittedDist {
    /// Log-density at `x` on the original data scale.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_pdf_internal(self.rescale.to_internal(x)) - self.rescale.scale.ln()
    }

    /// CDF at `x` on the original data scale.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_internal(self.rescale.to_internal(x))
    }

    fn ln_pdf_internal(&self, y: f64) -> f64 {
        match self.family {
            Family::Normal => Normal::new(self.params[0], self.params[1])
                .expect("valid fit")
                .ln_pdf(y),
            Family::Gamma => {
                if y <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    Gamma::new(self.params[0], self.params[1])
                        .expect("valid fit")
                        .ln_pdf(y)
                }
            }
            Family::Beta => {
                if y <= 0.0 || y >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    Beta::new(self.params[0], self.params[1])
                        .expect("valid fit")
                        .ln_pdf(y)
                }
            }
            Family::StudentT => StudentsT::new(self.params[0], self.params[1], self.params[2])
                .expect("valid fit")
                .ln_pdf(y),
        }
    }

    fn cdf_internal(&self, y: f64) -> f64 {
        match self.family {
            Family::Normal => Normal::new(self.params[0], self.params[1])
                .expect("valid fit")
                .cdf(y),
            Family::Gamma => Gamma::new(self.params[0], self.params[1])
                .expect("valid fit")
                .cdf(y),
            Family::Beta => Beta::new(self.params[0], self.params[1])
                .expect("valid fit")
                .cdf(y),
            Family::StudentT => StudentsT::new(self.params[0], self.params[1], self.params[2])
                .expect("valid fit")
                .cdf(y),
        }
    }

    fn inverse_cdf_internal(&self, q: f64) -> f64 {
        match self.family {
            Family::Normal => Normal::new(self.params[0], self.params[1])
                .expect("valid fit")
                .inverse_cdf(q),
            Family::Gamma => Gamma::new(self.params[0], self.params[1])
                .expect("valid fit")
                .inverse_cdf(q),
            Family::Beta => Beta::new(self.params[0], self.params[1])
                .expect("valid fit")
                .inverse_cdf(q),
            Family::StudentT => StudentsT::new(self.params[0], self.params[1], self.params[2])
                .expect("valid fit")
                .inverse_cdf(q),
        }
    }
}

fn fit_normal(data: &[f64]) -> Result<FittedDist> {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
    Ok(FittedDist {
        family: Family::Normal,
        params: vec![mean, sd],
        rescale: Rescale::IDENTITY,
        loglik,
    })
}

fn fit_gamma(data: &[f64], lo: f64, hi: f64) -> Result<FittedDist> {
    // Shift onto positive support when the sample touches zero or below.
    let rescale = if lo > 0.0 {
        Rescale::IDENTITY
    } else {
        Rescale {
            offset: lo - BOUND_EPS * (hi - lo),
            scale: 1.0,
        }
    };
    let y: Vec<f64> = data.iter().map(|&x| rescale.to_internal(x)).collect();
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mean_ln = y.iter().map(|v| v.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_ln;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::FitFailed("degenerate sample for Gamma fit".into()));
    }
    // Newton iteration on ln k - psi(k) = s, with a standard closed-form start.
    let mut k = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = k.ln() - digamma(k) - s;
        let fp = 1.0 / k - trigamma(k);
        let step = f / fp;
        let next = (k - step).max(k * 0.1);
        if (next - k).abs() <= 1e-12 * k {
            k = next;
            break;
        }
        k = next;
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::FitFailed("Gamma shape iteration diverged".into()));
    }
    let rate = k / mean;
    let loglik =
        n * (k * rate.ln() - ln_gamma(k)) + (k - 1.0) * n * mean_ln - rate * n * mean;
    Ok(FittedDist {
        family: Family::Gamma,
        params: vec![k, rate],
        rescale,
        loglik,
    })
}

fn fit_beta(data: &[f64], lo: f64, hi: f64) -> Result<FittedDist> {
    // Map observed range onto [eps, 1-eps].
    let scale = (hi - lo) / (1.0 - 2.0 * BOUND_EPS);
    let rescale = Rescale {
        offset: lo - scale * BOUND_EPS,
        scale,
    };
    let y: Vec<f64> = data.iter().map(|&x| rescale.to_internal(x)).collect();
    let n = y.len() as f64;
    let mean_ln = y.iter().map(|v| v.ln()).sum::<f64>() / n;
    let mean_ln1m = y.iter().map(|v| (1.0 - v).ln()).sum::<f64>() / n;
    let m = y.iter().sum::<f64>() / n;
    let v = y.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    if v <= 0.0 {
        return Err(Error::FitFailed("degenerate sample for Beta fit".into()));
    }
    // Method-of-moments start, then Newton on the score.
    let c = (m * (1.0 - m) / v - 1.0).max(1e-3);
    let mut a = (m * c).max(1e-3);
    let mut b = ((1.0 - m) * c).max(1e-3);
    for _ in 0..200 {
        let psi_ab = digamma(a + b);
        let ga = psi_ab - digamma(a) + mean_ln;
        let gb = psi_ab - digamma(b) + mean_ln1m;
        let tab = trigamma(a + b);
        let haa = tab - trigamma(a);
        let hbb = tab - trigamma(b);
        let det = haa * hbb - tab * tab;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (hbb * ga - tab * gb) / det;
        let db = (haa * gb - tab * ga) / det;
        let mut t = 1.0;
        while a - t * da <= 0.0 || b - t * db <= 0.0 {
            t *= 0.5;
            if t < 1e-12 {
                break;
            }
        }
        let na = a - t * da;
        let nb = b - t * db;
        let done = (na - a).abs() <= 1e-12 * a.max(1.0) && (nb - b).abs() <= 1e-12 * b.max(1.0);
        a = na;
        b = nb;
        if done {
            break;
        }
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::FitFailed("Beta fit diverged".into()));
    }
    let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let loglik_internal = n * ((a - 1.0) * mean_ln + (b - 1.0) * mean_ln1m - ln_b);
    let loglik = loglik_internal - n * scale.ln();
    Ok(FittedDist {
        family: Family::Beta,
        params: vec![a, b],
        rescale,
        loglik,
    })
}

/// Profile log-likelihood over df via golden-section search, with an EM inner
/// loop for location and scale at fixed df.
fn fit_student_t(data: &[f64]) -> Result<FittedDist> {
    let eval = |df: f64| student_t_profile(data, df);
    let (mut lo, mut hi) = (1.0_f64, 100.0_f64);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1.2 > f2.2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let (df, (mu, sigma, ll)) = if f1.2 > f2.2 { (x1, f1) } else { (x2, f2) };
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::FitFailed("Student-t fit diverged".into()));
    }
    Ok(FittedDist {
        family: Family::StudentT,
        params: vec![mu, sigma, df],
        rescale: Rescale::IDENTITY,
        loglik: ll,
    })
}

fn student_t_profile(data: &[f64], df: f64) -> (f64, f64, f64) {
    let n = data.len() as f64;
    let mut mu = data.iter().sum::<f64>() / n;
    let mut var = data.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    for _ in 0..200 {
        let mut wsum = 0.0;
        let mut wx = 0.0;
        for &x in data {
            let z2 = (x - mu) * (x - mu) / var;
            let w = (df + 1.0) / (df + z2);
            wsum += w;
            wx += w * x;
        }
        let new_mu = wx / wsum;
        let mut wss = 0.0;
        for &x in data {
            let z2 = (x - new_mu) * (x - new_mu) / var;
            let w = (df + 1.0) / (df + z2);
            wss += w * (x - new_mu) * (x - new_mu);
        }
        let new_var = wss / n;
        let done = (new_mu - mu).abs() <= 1e-10 * (1.0 + mu.abs())
            && (new_var - var).abs() <= 1e-10 * var;
        mu = new_mu;
        var = new_var.max(1e-300);
        if done {
            break;
        }
    }
    let sigma = var.sqrt();
    let norm =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let mut ll = n * (norm - sigma.ln());
    for &x in data {
        let z2 = (x - mu) * (x - mu) / var;
        ll -= 0.5 * (df + 1.0) * (z2 / df).ln_1p();
    }
    (mu, sigma, ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::RngStream;
    use approx::assert_relative_eq;
    use rand_distr::Distribution;

    #[test]
    fn normal_fit_recovers_standard_normal() {
        let mut rng = RngStream::from_seed(100);
        let d = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let fit = fit_distribution(&data, Family::Normal).unwrap();
        assert!((fit.params[0]).abs() < 0.02, "mean {}", fit.params[0]);
        assert!((fit.params[1] - 1.0).abs() < 0.02, "sd {}", fit.params[1]);
    }

    #[test]
    fn gamma_beats_normal_on_gamma_data() {
        let mut rng = RngStream::from_seed(101);
        let d = rand_distr::Gamma::new(2.0, 1.0).unwrap(); // shape 2, scale 1 = rate 1
        let data: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let g = fit_distribution(&data, Family::Gamma).unwrap();
        let n = fit_distribution(&data, Family::Normal).unwrap();
        assert!(g.loglik > n.loglik);
        assert_relative_eq!(g.params[0], 2.0, epsilon = 0.05);
        assert_relative_eq!(g.params[1], 1.0, epsilon = 0.05);
    }

    #[test]
    fn constant_data_rejected() {
        let data = vec![1.5; 100];
        assert!(matches!(
            fit_distribution(&data, Family::Normal),
            Err(Error::FitFailed(_))
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        let data = vec![1.0, 2.0, 3.0];
        assert!(fit_distribution(&data, Family::Normal).is_err());
    }

    #[test]
    fn gamma_fit_handles_negative_support_by_shifting() {
        let mut rng = RngStream::from_seed(102);
        let d = rand_distr::Gamma::new(3.0, 2.0).unwrap();
        let data: Vec<f64> = (0..20_000).map(|_| d.sample(&mut rng) - 5.0).collect();
        let fit = fit_distribution(&data, Family::Gamma).unwrap();
        assert!(fit.rescale.offset < data.iter().cloned().fold(f64::INFINITY, f64::min));
        // density integrates over the original support
        assert!(fit.ln_pdf(0.0).is_finite());
    }

    #[test]
    fn beta_fit_recovers_shape_on_unit_data() {
        let mut rng = RngStream::from_seed(103);
        let d = rand_distr::Beta::new(2.0, 5.0).unwrap();
        let data: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let fit = fit_distribution(&data, Family::Beta).unwrap();
        // Support is re-mapped from the observed min/max, so shapes drift a
        // little; they must stay in the right neighborhood.
        assert_relative_eq!(fit.params[0], 2.0, epsilon = 0.25);
        assert_relative_eq!(fit.params[1], 5.0, epsilon = 0.6);
    }

    #[test]
    fn student_t_beats_normal_on_heavy_tails() {
        let mut rng = RngStream::from_seed(104);
        let d = rand_distr::StudentT::new(3.0).unwrap();
        let data: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let t = fit_distribution(&data, Family::StudentT).unwrap();
        let n = fit_distribution(&data, Family::Normal).unwrap();
        assert!(t.loglik > n.loglik);
        assert!((t.params[2] - 3.0).abs() < 0.5, "df {}", t.params[2]);
    }

    #[test]
    fn percentile_normal_median_and_two_sigma() {
        let fit = FittedDist {
            family: Family::Normal,
            params: vec![0.0, 1.0],
            rescale: Rescale::IDENTITY,
            loglik: 0.0,
        };
        assert_relative_eq!(percentile(&fit, 50.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(percentile(&fit, 97.72).unwrap(), 2.0, epsilon = 1e-3);
    }

    #[test]
    fn percentile_rejects_out_of_range() {
        let fit = FittedDist {
            family: Family::Normal,
            params: vec![0.0, 1.0],
            rescale: Rescale::IDENTITY,
            loglik: 0.0,
        };
        assert!(percentile(&fit, 0.0).is_err());
        assert!(percentile(&fit, 100.0).is_err());
        assert!(percentile(&fit, -2.0).is_err());
    }

    #[test]
    fn percentile_monotone_across_families() {
        let mut rng = RngStream::from_seed(105);
        let d = rand_distr::Gamma::new(2.5, 1.5).unwrap();
        let data: Vec<f64> = (0..5_000).map(|_| d.sample(&mut rng)).collect();
        for family in [Family::Normal, Family::Gamma, Family::Beta, Family::StudentT] {
            let fit = fit_distribution(&data, family).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for p in [1.0, 15.0, 40.0, 60.0, 85.0, 99.0] {
                let x = percentile(&fit, p).unwrap();
                assert!(x > prev, "{family:?} percentile not monotone at {p}");
                prev = x;
            }
        }
    }

    #[test]
    fn percentile_inverts_cdf_to_high_precision() {
        let mut rng = RngStream::from_seed(106);
        let d = rand_distr::Normal::new(1.0, 2.0).unwrap();
        let data: Vec<f64> = (0..5_000).map(|_| d.sample(&mut rng)).collect();
        for family in [Family::Normal, Family::Gamma, Family::Beta, Family::StudentT] {
            let fit = fit_distribution(&data, family).unwrap();
            for p in [5.0, 30.0, 50.0, 85.0, 99.0] {
                let x = percentile(&fit, p).unwrap();
                assert!(
                    (fit.cdf(x) - p / 100.0).abs() < 1e-9,
                    "{family:?} |cdf(percentile) - q| too large at {p}"
                );
            }
        }
    }
}
