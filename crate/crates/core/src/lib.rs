//! Segmentation of multivariate car-following time series into primitive
//! driving patterns with weak-limit Gibbs samplers (HDP-HMM, sticky HDP-HMM,
//! HDP-HSMM), semantic labeling of the resulting segments, and driving-style
//! analytics built on pattern frequency distributions.
//!
//! The crate is organized as a pipeline:
//!
//! * [`dataio`] loads, extracts, normalizes, and synthesizes event data;
//! * [`probcore`] provides the random-variate and conjugate-update machinery;
//! * [`models`] implements exact message passing and state sampling for the
//!   finite (weak-limit) HMM and explicit-duration HSMM;
//! * [`inference`] runs the Gibbs samplers over a collection of events;
//! * [`semantics`] maps segments onto the 75-pattern semantic lattice;
//! * [`styles`] computes frequency distributions, preference indices, KL
//!   divergences, and duration statistics;
//! * [`evalharness`] cross-validates the three model kinds against each other.

pub mod dataio;
pub mod error;
pub mod evalharness;
pub mod inference;
pub mod mathutil;
pub mod models;
pub mod probcore;
pub mod semantics;
pub mod styles;

pub use error::{Error, Result};
pub use probcore::RngStream;
