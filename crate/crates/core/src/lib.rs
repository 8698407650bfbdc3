//! Estimate the cardinality of a set you can only access through a uniform
//! random-sampling oracle.
//!
//! The estimator draws samples until the number of *repeats* (draws whose
//! value was already seen in the same run) reaches a threshold
//! `k_err = 4/delta_err^2 * ln(3/p_err)`, then returns the weighted sample
//! count divided by the repeat count. With probability greater than
//! `1 - p_err` the result lies within a factor `(1 +/- delta_err)` of the
//! true size and the run draws at most
//! `min(n, 2*ceil(sqrt(k_err*n))) + ceil(k_err)` samples; it never draws more
//! than `n + ceil(k_err)`.
//!
//! ```
//! use cardest::{bounds::Precision, estimator, samplers};
//! use cardest::samplers::SamplingSource;
//!
//! let precision = Precision::new(0.2, 0.1)?;
//! let mut source = samplers::SyntheticSource::new(10_000, samplers::RngSeed::new(42, 0))?;
//! let estimate = estimator::run(precision, || source.draw(), None)?;
//! assert!(estimate.value > 8_000.0 && estimate.value < 12_000.0);
//! # Ok::<(), cardest::Error>(())
//! ```
//!
//! The [`harness`] module validates the guarantee empirically: it runs
//! batches of independent seeded trials against sets of known size and
//! reports the failure rates with Wilson confidence bounds.

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod report;
pub mod samplers;

pub use bounds::{KErr, Precision};
pub use error::{Error, Result};
pub use estimator::{Estimate, Estimator, SampleId};
pub use harness::{GridPoint, TrialRecord, VerificationReport};
pub use samplers::{FileSource, IdentityMode, RngSeed, SamplingSource, SyntheticSource};
