//! Selective sampling for streaming best-arm identification over linear
//! models.
//!
//! A learner watches a stream of feature vectors drawn from a known finite
//! distribution and must decide, point by point, whether to pay for a noisy
//! linear label. The goal is to identify the best arm from a finite arm set
//! with a target confidence while keeping both the stream time and the label
//! count small. This crate provides:
//!
//! * packed symmetric-matrix primitives and PSD projections ([`linalg`]);
//! * problem instances, a circular benchmark, and a binary-classification
//!   reduction ([`instance`]);
//! * the query-rule design layer: the weight functional `rho`, the
//!   closed-form barrier selection rule, its Lagrangian dual, two stochastic
//!   ascent solvers with certificates, and exact finite-support design
//!   programs ([`design`]);
//! * robust mean estimation (Catoni and median-of-means) and a robust
//!   interval-projection parameter estimator ([`estimators`]);
//! * the round-based elimination sampler with naive, oracle, and learned
//!   query modes ([`sampler`]);
//! * computable complexity bounds for the unlabeled/label trade-off
//!   ([`bounds`]).

pub mod bounds;
pub mod design;
pub mod error;
pub mod estimators;
pub mod instance;
pub mod linalg;
pub mod sampler;

pub use error::{Error, Result};
