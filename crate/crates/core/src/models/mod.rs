//! Finite (weak-limit) representations of the HMM and the explicit-duration
//! HSMM: exact message passing, posterior state-sequence sampling, and
//! maximizing (Viterbi-style) segmentation.
//!
//! All message passing runs in log space. HSMM durations follow a shifted
//! Poisson (`d = 1 + Poisson(omega)`), segments are truncated at `d_max`
//! frames, and the final segment of every series is right-censored: it
//! contributes the duration survival function instead of the pmf.

mod emission;
mod hmm;
mod hsmm;
mod segmentation;

pub use emission::{emission_loglik, GaussianEmission, ObsLogLik};
pub use hmm::{
    hmm_forward_backward, hmm_sample_states, hmm_sample_states_from_messages, hmm_viterbi,
    HmmMessages, HmmParams,
};
pub use hsmm::{
    hsmm_messages, hsmm_sample_states, hsmm_sample_states_from_messages, hsmm_viterbi,
    DurationTables, HsmmMessages, HsmmParams,
};
pub use segmentation::{Segment, Segmentation};
