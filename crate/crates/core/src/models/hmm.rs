use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::emission::{GaussianEmission, ObsLogLik};
use super::segmentation::Segmentation;
use crate::error::{Error, Result};
use crate::mathutil::LogSumExp;
use crate::probcore::{sample_categorical_log, RngStream};

/// Finite HMM with Gaussian emissions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HmmParams {
    /// Initial state distribution over the truncation level L.
    pub init: Vec<f64>,
    /// Row-stochastic L x L transition matrix.
    pub trans: DMatrix<f64>,
    pub emissions: Vec<GaussianEmission>,
}

impl HmmParams {
    pub fn n_states(&self) -> usize {
        self.emissions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.n_states();
        if self.init.len() != l || self.trans.nrows() != l || self.trans.ncols() != l {
            return Err(Error::Contract("inconsistent HMM shapes".into()));
        }
        for i in 0..l {
            let row_sum: f64 = self.trans.row(i).iter().sum();
            if (row_sum - 1.0).abs() > 1e-10 {
                return Err(Error::Contract(format!(
                    "transition row {i} sums to {row_sum}"
                )));
            }
        }
        let init_sum: f64 = self.init.iter().sum();
        if (init_sum - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!(
                "initial distribution sums to {init_sum}"
            )));
        }
        Ok(())
    }

    fn ln_init(&self) -> Vec<f64> {
        self.init.iter().map(|p| p.ln()).collect()
    }

    fn ln_trans(&self) -> DMatrix<f64> {
        self.trans.map(|p| p.ln())
    }
}

/// Forward and backward log messages plus the evidence.
#[derive(Debug, Clone)]
pub struct HmmMessages {
    /// `log_alpha[(t, i)] = log p(y_{0..=t}, x_t = i)`.
    pub log_alpha: DMatrix<f64>,
    /// `log_beta[(t, i)] = log p(y_{t+1..T} | x_t = i)`.
    pub log_beta: DMatrix<f64>,
    pub log_evidence: f64,
}

impl HmmMessages {
    /// Evidence recomputed from the backward messages; equals
    /// `log_evidence` up to round-off and is used as a self-check.
    pub fn evidence_from_backward(&self, obs: &ObsLogLik, params: &HmmParams) -> f64 {
        let mut acc = LogSumExp::new();
        for i in 0..params.n_states() {
            acc.add(params.init[i].ln() + obs.at(0, i) + self.log_beta[(0, i)]);
        }
        acc.value()
    }
}

/// Exact forward-backward pass in log space.
pub fn hmm_forward_backward(obs: &ObsLogLik, params: &HmmParams) -> HmmMessages {
    let t_len = obs.t_len();
    let l = params.n_states();
    assert!(t_len >= 1, "need at least one frame");
    assert_eq!(obs.n_states(), l, "observation/state count mismatch");

    let ln_init = params.ln_init();
    let ln_trans = params.ln_trans();

    let mut log_alpha = DMatrix::zeros(t_len, l);
    for j in 0..l {
        log_alpha[(0, j)] = ln_init[j] + obs.at(0, j);
    }
    for t in 1..t_len {
        for j in 0..l {
            let mut acc = LogSumExp::new();
            for i in 0..l {
                acc.add(log_alpha[(t - 1, i)] + ln_trans[(i, j)]);
            }
            log_alpha[(t, j)] = acc.value() + obs.at(t, j);
        }
    }

    let mut log_beta = DMatrix::zeros(t_len, l);
    for t in (0..t_len - 1).rev() {
        for i in 0..l {
            let mut acc = LogSumExp::new();
            for j in 0..l {
                acc.add(ln_trans[(i, j)] + obs.at(t + 1, j) + log_beta[(t + 1, j)]);
            }
            log_beta[(t, i)] = acc.value();
        }
    }

    let mut ev = LogSumExp::new();
    for j in 0..l {
        ev.add(log_alpha[(t_len - 1, j)]);
    }
    HmmMessages {
        log_alpha,
        log_beta,
        log_evidence: ev.value(),
    }
}

/// Draw a state path exactly from `p(x | y, params)` by backward sampling on
/// the forward messages; returned run-length-encoded.
pub fn hmm_sample_states(
    obs: &ObsLogLik,
    params: &HmmParams,
    rng: &mut RngStream,
) -> Segmentation {
    let messages = hmm_forward_backward(obs, params);
    hmm_sample_states_from_messages(&messages, params, rng)
}

/// Backward-sampling stage reusing precomputed messages.
pub fn hmm_sample_states_from_messages(
    messages: &HmmMessages,
    params: &HmmParams,
    rng: &mut RngStream,
) -> Segmentation {
    let t_len = messages.log_alpha.nrows();
    let l = params.n_states();
    let ln_trans = params.ln_trans();

    let mut labels = vec![0usize; t_len];
    let last: Vec<f64> = (0..l).map(|i| messages.log_alpha[(t_len - 1, i)]).collect();
    labels[t_len - 1] = sample_categorical_log(&last, rng);
    let mut weights = vec![0.0; l];
    for t in (0..t_len - 1).rev() {
        let next = labels[t + 1];
        for (i, w) in weights.iter_mut().enumerate() {
            *w = messages.log_alpha[(t, i)] + ln_trans[(i, next)];
        }
        labels[t] = sample_categorical_log(&weights, rng);
    }
    Segmentation::from_labels(&labels)
}

/// Maximizing state path (ties resolved toward the smaller state index),
/// run-length-encoded.
pub fn hmm_viterbi(obs: &ObsLogLik, params: &HmmParams) -> Segmentation {
    let t_len = obs.t_len();
    let l = params.n_states();
    let ln_init = params.ln_init();
    let ln_trans = params.ln_trans();

    // Backward value function so the forward reconstruction can break ties
    // by smallest state index with exact future values in hand.
    let mut value = DMatrix::zeros(t_len, l);
    for i in 0..l {
        value[(t_len - 1, i)] = obs.at(t_len - 1, i);
    }
    for t in (0..t_len - 1).rev() {
        for i in 0..l {
            let mut best = f64::NEG_INFINITY;
            for j in 0..l {
                let v = ln_trans[(i, j)] + value[(t + 1, j)];
                if v > best {
                    best = v;
                }
            }
            value[(t, i)] = obs.at(t, i) + best;
        }
    }

    let mut labels = vec![0usize; t_len];
    let mut best = f64::NEG_INFINITY;
    for i in 0..l {
        let v = ln_init[i] + value[(0, i)];
        if v > best {
            best = v;
            labels[0] = i;
        }
    }
    for t in 1..t_len {
        let prev = labels[t - 1];
        let mut best = f64::NEG_INFINITY;
        for j in 0..l {
            let v = ln_trans[(prev, j)] + value[(t, j)];
            if v > best {
                best = v;
                labels[t] = j;
            }
        }
    }
    Segmentation::from_labels(&labels)
}
