//! Random spherical codebooks as Gaussian-mixture centers: channel
//! simulation, decoders, a two-step center learner and closed-form bounds.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod decoders;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod rng;
pub mod sphere;
pub mod vecops;

pub use bounds::{capacity, capacity_inv, RateRegime};
pub use channel::{GmmBatch, LabelMode, Observations, Privileged};
pub use codebook::{noise_for_beta, rate, sample_codebook, ChannelParams, Codebook};
pub use decoders::{DecodeOutcome, Decoder, DecoderSpec, ErrorEstimate};
pub use error::{Error, Result};
pub use experiment::{ExperimentKind, Report, SweepSpec};
pub use rng::SimRng;
pub use sphere::{Net, NetConfig, NetStrategy, Point};
pub use learner::{LearnerConfig, LearnerResult, MatchResult, TestKind};
