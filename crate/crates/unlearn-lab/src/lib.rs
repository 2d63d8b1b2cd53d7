//! A simulation laboratory for machine unlearning under adaptive deletion
//! sequences.
//!
//! The crate wires together:
//! - sharded ensemble learning/unlearning engines ([`ensemble`]) over simple
//!   pluggable learners ([`learners`]),
//! - differentially private prediction serving with budget accounting and
//!   automatic full-retrain resets, plus a brute-force max-information
//!   oracle ([`privacy`]),
//! - closed-form calculators for the adaptive unlearning guarantees and
//!   retrain-cost bounds ([`guarantees`]),
//! - the deletion attacks that falsify naive guarantees and the
//!   full-retraining comparator ([`adversaries`]),
//! - a deterministic Monte Carlo harness with confidence intervals and
//!   hypothesis tests ([`harness`]).
//!
//! Every piece of randomness derives from counter-based streams
//! ([`rng::SeedVector`]), so a run is a pure function of its configuration
//! and master seed. Start with the `examples/` directory: each example is a
//! runnable tour of one capability.

pub mod adversaries;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod guarantees;
pub mod harness;
pub mod learners;
pub mod privacy;
pub mod rng;

pub use error::{Error, Result};
