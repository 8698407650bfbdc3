//! Incremental repeat-counting estimator.
//!
//! The estimator consumes uniform random samples one at a time and maintains
//! three counters:
//!
//! * `s` — samples taken so far,
//! * `d` — distinct samples taken so far,
//! * `w` — samples so far, each weighted by the value `d` had when it was
//!   taken (i.e. `w` gains the pre-sample `d` on every draw).
//!
//! The chance that a draw repeats an already-seen element is `d/n` for a set
//! of size `n`, so the repeat count `s - d` is a sum of independent indicators
//! with total expectation `w/n`. Sampling stops once `s - d` reaches the
//! repeat threshold `k_err`, at which point `w/(s-d)` is the estimate of `n`
//! that equates the observed repeat count with its expectation.
//!
//! Duplicate detection is exact (a hash set over full identities, never a
//! probabilistic filter): any membership error would break the independence
//! of the repeat indicators and void the guarantee. The memory footprint is
//! O(d), and `d` stays near `2*sqrt(k_err*n)` with high probability.

use std::collections::HashSet;
use std::sync::Arc;

use crate::bounds::{compute_k_err, KErr, Precision};
use crate::error::{Error, Result};

/// Identity of one sampled element. Equality is exact and deterministic:
/// two draws of the same element always compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SampleId {
    /// 64-bit token (synthetic sets, position-addressed file lines).
    Token(u64),
    /// Content identity: the sampled text itself, compared by value.
    Content(Arc<str>),
}

/// The live counters of one estimation run. Single-owner: observe samples
/// until [`Estimator::is_terminated`], then take [`Estimator::finish`].
#[derive(Debug, Clone)]
pub struct Estimator {
    samples: u64,
    distinct: u64,
    weighted: u128,
    seen: HashSet<SampleId>,
    k: KErr,
    terminated: bool,
}

impl Estimator {
    /// Fresh state: all counters zero, threshold `k_err` derived from the
    /// precision target.
    pub fn new(precision: Precision) -> Result<Estimator> {
        Ok(Estimator {
            samples: 0,
            distinct: 0,
            weighted: 0,
            seen: HashSet::new(),
            k: compute_k_err(precision)?,
            terminated: false,
        })
    }

    /// Feeds one sample. Order matters and is fixed: `w` gains the
    /// pre-sample `d`, then `s` increments, then `d` and the seen-set update,
    /// then the stopping rule `s - d >= k_err` is evaluated.
    ///
    /// Observing after termination is an error, not a no-op: silent extra
    /// samples would corrupt the stopping-rule semantics.
    pub fn observe(&mut self, id: SampleId) -> Result<()> {
        if self.terminated {
            return Err(Error::AlreadyTerminated);
        }
        // w <= s(s-1)/2 < 2^127 for any u64 s, so u128 cannot overflow here.
        self.weighted += self.distinct as u128;
        self.samples += 1;
        if self.seen.insert(id) {
            self.distinct += 1;
        }
        debug_assert!(self.distinct as usize == self.seen.len());
        debug_assert!(self.weighted <= self.samples as u128 * (self.samples as u128 - 1) / 2);
        // Integer repeat count against the real threshold, no epsilon.
        self.terminated = (self.samples - self.distinct) as f64 >= self.k.value();
        Ok(())
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn distinct(&self) -> u64 {
        self.distinct
    }

    pub fn weighted(&self) -> u128 {
        self.weighted
    }

    /// Repeats witnessed so far: `s - d`.
    pub fn repeats(&self) -> u64 {
        self.samples - self.distinct
    }

    pub fn k_err(&self) -> KErr {
        self.k
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// The terminal estimate `w/(s-d)`. Errors until the stopping rule has
    /// fired.
    pub fn finish(&self) -> Result<Estimate> {
        if !self.terminated {
            return Err(Error::NotTerminated);
        }
        let denominator = self.samples - self.distinct;
        Ok(Estimate {
            numerator: self.weighted,
            denominator,
            value: self.weighted as f64 / denominator as f64,
            samples_used: self.samples,
            distinct: self.distinct,
        })
    }
}

/// Terminal output: the exact rational `w/(s-d)` plus sampling statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// `w` at termination.
    pub numerator: u128,
    /// `s - d` at termination; at least `ceil(k_err)` on a normal run.
    pub denominator: u64,
    /// `numerator / denominator` rounded to a double.
    pub value: f64,
    /// `s` at termination.
    pub samples_used: u64,
    /// `d` at termination.
    pub distinct: u64,
}

/// Drives a fresh estimator from a sampling closure until termination.
///
/// The guarantee applies when `draw` is uniform and independent over a fixed
/// finite set; for any other source the arithmetic still runs but nothing is
/// promised. If `hard_cap` is supplied and the estimator is still running
/// after that many samples, returns [`Error::BudgetExhausted`] carrying the
/// partial counters. Source failures propagate.
pub fn run<F>(precision: Precision, mut draw: F, hard_cap: Option<u64>) -> Result<Estimate>
where
    F: FnMut() -> Result<SampleId>,
{
    let mut est = Estimator::new(precision)?;
    while !est.is_terminated() {
        if hard_cap.is_some_and(|cap| est.samples() >= cap) {
            return Err(Error::BudgetExhausted {
                samples: est.samples(),
                distinct: est.distinct(),
                weighted: est.weighted(),
            });
        }
        est.observe(draw()?)?;
    }
    est.finish()
}
