//! Monte Carlo verification of the estimator's guarantee.
//!
//! A batch runs many independent estimator trials against a synthetic source
//! of known cardinality `n` and measures how often the guarantee's failure
//! events occur: estimate outside `(1 +/- delta_err) n`, or more draws than
//! the high-probability sample budget. The guarantee puts the joint rate
//! below `p_err`; the harness reports the empirical rates together with
//! Wilson upper confidence bounds so a single batch can be compared against
//! `p_err` without flakiness.
//!
//! Trials are seeded `stream_id = trial_index` from one base seed, which
//! makes them independent, order-insensitive, and reproducible: a report is
//! a pure function of `(n, precision, trials, base_seed)`.

use crate::bounds::{self, KErr, Precision};
use crate::error::{Error, Result};
use crate::estimator;
use crate::report::JsonBuilder;
use crate::samplers::{RngSeed, SamplingSource, SyntheticSource};

/// Outcome of one estimator trial against a known cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub estimate_value: f64,
    pub samples_used: u64,
    /// `(1 - delta_err) n <= estimate <= (1 + delta_err) n`.
    pub within_accuracy: bool,
    /// `samples_used <= sample_budget(n, k_err)`.
    pub within_budget: bool,
    /// `samples_used <= n + ceil(k_err)`. Deterministic: always true unless
    /// the implementation is broken.
    pub within_hard_cap: bool,
    /// Diagnostic split of accuracy failures, mirroring the two one-sided
    /// failure events.
    pub overestimated: bool,
    pub underestimated: bool,
}

/// Aggregate over a batch of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub n: u64,
    pub precision: Precision,
    pub trials: u64,
    pub accuracy_failure_rate: f64,
    pub overestimate_rate: f64,
    pub underestimate_rate: f64,
    pub budget_exceed_rate: f64,
    /// Rate of trials failing accuracy OR budget.
    pub joint_failure_rate: f64,
    /// Wilson upper confidence bounds on the joint failure rate.
    pub wilson_95_upper: f64,
    pub wilson_99_upper: f64,
    pub mean_samples: f64,
    pub max_samples: u64,
    /// `sample_budget(n, k_err)`.
    pub budget: u64,
    /// `n + ceil(k_err)`.
    pub hard_cap: u64,
}

impl VerificationReport {
    /// The acceptance verdict: the Wilson-99% upper bound on the joint
    /// failure rate lies below `p_err`. Strictly weaker than the guarantee
    /// itself, so a correct implementation passes with margin.
    pub fn passes(&self) -> bool {
        self.wilson_99_upper < self.precision.p_err()
    }

    /// Byte-deterministic JSON (sorted keys, 17-significant-digit floats).
    pub fn to_json(&self) -> String {
        JsonBuilder::new()
            .f64("accuracy_failure_rate", self.accuracy_failure_rate)
            .u64("budget", self.budget)
            .f64("budget_exceed_rate", self.budget_exceed_rate)
            .f64("delta_err", self.precision.delta_err())
            .u64("hard_cap", self.hard_cap)
            .f64("joint_failure_rate", self.joint_failure_rate)
            .u64("max_samples", self.max_samples)
            .f64("mean_samples", self.mean_samples)
            .u64("n", self.n)
            .f64("overestimate_rate", self.overestimate_rate)
            .f64("p_err", self.precision.p_err())
            .u64("trials", self.trials)
            .f64("underestimate_rate", self.underestimate_rate)
            .f64("wilson_95_upper", self.wilson_95_upper)
            .f64("wilson_99_upper", self.wilson_99_upper)
            .finish()
    }

    pub fn csv_header() -> &'static str {
        "n,delta_err,p_err,trials,acc_fail_rate,budget_exceed_rate,joint_fail_rate,\
         wilson99,mean_samples,max_samples,budget,hard_cap"
    }

    pub fn csv_row(&self) -> String {
        use crate::report::fmt_f64 as f;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            f(self.precision.delta_err()),
            f(self.precision.p_err()),
            self.trials,
            f(self.accuracy_failure_rate),
            f(self.budget_exceed_rate),
            f(self.joint_failure_rate),
            f(self.wilson_99_upper),
            f(self.mean_samples),
            self.max_samples,
            self.budget,
            self.hard_cap
        )
    }
}

/// Runs one seeded trial: a fresh synthetic source with
/// `stream_id = trial_index`, estimator to termination, then the three
/// success events evaluated against the known `n`.
pub fn run_single_trial(
    n: u64,
    precision: Precision,
    base_seed: u64,
    trial_index: u64,
) -> Result<TrialRecord> {
    let k = bounds::compute_k_err(precision)?;
    let budget = bounds::sample_budget(n, k)?;
    let cap = bounds::hard_cap(n, k)?;

    let mut source = SyntheticSource::new(n, RngSeed::new(base_seed, trial_index))?;
    // The cap is mathematically unreachable before termination; passing it
    // as a run limit turns an implementation bug into a loud error instead
    // of a hang.
    let est = estimator::run(precision, || source.draw(), Some(cap + 1))?;

    let lo = (1.0 - precision.delta_err()) * n as f64;
    let hi = (1.0 + precision.delta_err()) * n as f64;
    let overestimated = est.value > hi;
    let underestimated = est.value < lo;
    let within_hard_cap = est.samples_used <= cap;
    if !within_hard_cap {
        return Err(Error::HardCapViolated {
            trial: trial_index,
            samples: est.samples_used,
            cap,
        });
    }
    Ok(TrialRecord {
        trial_index,
        estimate_value: est.value,
        samples_used: est.samples_used,
        within_accuracy: !overestimated && !underestimated,
        within_budget: est.samples_used <= budget,
        within_hard_cap,
        overestimated,
        underestimated,
    })
}

fn aggregate(
    n: u64,
    precision: Precision,
    k: KErr,
    records: &[TrialRecord],
) -> Result<VerificationReport> {
    let trials = records.len() as u64;
    let count = |pred: fn(&TrialRecord) -> bool| records.iter().filter(|r| pred(r)).count() as u64;
    let acc_failures = count(|r| !r.within_accuracy);
    let over = count(|r| r.overestimated);
    let under = count(|r| r.underestimated);
    let budget_failures = count(|r| !r.within_budget);
    let joint = count(|r| !r.within_accuracy || !r.within_budget);
    let total_samples: u128 = records.iter().map(|r| r.samples_used as u128).sum();
    let rate = |x: u64| x as f64 / trials as f64;
    Ok(VerificationReport {
        n,
        precision,
        trials,
        accuracy_failure_rate: rate(acc_failures),
        overestimate_rate: rate(over),
        underestimate_rate: rate(under),
        budget_exceed_rate: rate(budget_failures),
        joint_failure_rate: rate(joint),
        wilson_95_upper: wilson_upper(joint, trials, 0.95)?,
        wilson_99_upper: wilson_upper(joint, trials, 0.99)?,
        mean_samples: total_samples as f64 / trials as f64,
        max_samples: records.iter().map(|r| r.samples_used).max().unwrap_or(0),
        budget: bounds::sample_budget(n, k)?,
        hard_cap: bounds::hard_cap(n, k)?,
    })
}

/// Runs `trials` independent estimator trials and aggregates the failure
/// rates. A hard-cap violation (impossible unless the estimator or source is
/// broken) aborts the batch, attaching the report over the completed trials.
pub fn run_trials(
    n: u64,
    precision: Precision,
    trials: u64,
    base_seed: u64,
) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let k = bounds::compute_k_err(precision)?;
    let mut records = Vec::with_capacity(trials as usize);
    for trial_index in 0..trials {
        match run_single_trial(n, precision, base_seed, trial_index) {
            Ok(rec) => records.push(rec),
            Err(err) => {
                let partial = aggregate(n, precision, k, &records).unwrap_or(
                    // No completed trials to aggregate; emit an empty shell.
                    VerificationReport {
                        n,
                        precision,
                        trials: 0,
                        accuracy_failure_rate: 0.0,
                        overestimate_rate: 0.0,
                        underestimate_rate: 0.0,
                        budget_exceed_rate: 0.0,
                        joint_failure_rate: 0.0,
                        wilson_95_upper: 1.0,
                        wilson_99_upper: 1.0,
                        mean_samples: 0.0,
                        max_samples: 0,
                        budget: 0,
                        hard_cap: 0,
                    },
                );
                return Err(Error::BatchAborted {
                    trial: trial_index,
                    source: Box::new(err),
                    partial: Box::new(partial),
                });
            }
        }
    }
    aggregate(n, precision, k, &records)
}

/// One grid point of a verification sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: u64,
    pub precision: Precision,
}

/// Verifies every grid point with the same trial count and base seed.
/// Points are independent; output order matches input order, and a failing
/// point is recorded in place without aborting the others.
pub fn sweep(
    grid: &[GridPoint],
    trials: u64,
    base_seed: u64,
) -> Result<Vec<Result<VerificationReport>>> {
    if grid.is_empty() {
        return Err(Error::domain("sweep grid must contain at least one point"));
    }
    Ok(grid
        .iter()
        .map(|point| run_trials(point.n, point.precision, trials, base_seed))
        .collect())
}

/// Wilson-score upper confidence bound on a binomial proportion, using the
/// two-sided normal quantile for the stated confidence (so `confidence =
/// 0.95` uses z ~ 1.96). Robustly inside [0, 1] even at the extremes, which
/// is why it guards statistical acceptance tests instead of a Wald bound.
pub fn wilson_upper(successes: u64, trials: u64, confidence: f64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::domain("wilson bound needs at least one trial"));
    }
    if successes > trials {
        return Err(Error::domain(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    if !(confidence.is_finite() && confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must lie strictly between 0 and 1, got {confidence}"
        )));
    }
    if successes == trials {
        return Ok(1.0);
    }
    let z = normal::probit(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let center = p_hat + z2 / (2.0 * n);
    let radius = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(((center + radius) / (1.0 + z2 / n)).clamp(0.0, 1.0))
}

/// Standard normal machinery built from first principles (series +
/// continued fraction for erfc, bisection for the inverse), accurate to
/// well below 1e-12, which is all the Wilson bound needs.
mod normal {
    /// Complementary error function for non-negative argument.
    fn erfc(x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        if x < 2.0 {
            1.0 - erf_series(x)
        } else if x > 27.0 {
            0.0 // below the smallest positive double
        } else {
            erfc_continued_fraction(x)
        }
    }

    /// Maclaurin series, adequate for x < 2.
    fn erf_series(x: f64) -> f64 {
        let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 1u32;
        loop {
            term *= -x2 / n as f64;
            let contribution = term / (2 * n + 1) as f64;
            sum += contribution;
            if contribution.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
            n += 1;
            debug_assert!(n < 200);
        }
        two_over_sqrt_pi * sum
    }

    /// Lentz-evaluated continued fraction
    /// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + ...))),
    /// rapidly convergent for x >= 2.
    fn erfc_continued_fraction(x: f64) -> f64 {
        let tiny = 1e-300;
        let mut f = x.max(tiny);
        let mut c = f;
        let mut d = 0.0;
        for i in 1..300 {
            let a = i as f64 / 2.0;
            // b = x for every level
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    /// Standard normal CDF.
    fn phi(x: f64) -> f64 {
        let t = x / std::f64::consts::SQRT_2;
        if t >= 0.0 {
            1.0 - 0.5 * erfc(t)
        } else {
            0.5 * erfc(-t)
        }
    }

    /// Inverse standard normal CDF by bisection on the monotone `phi`.
    /// Speed is irrelevant here (one call per report).
    pub(super) fn probit(p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        if p == 0.5 {
            return 0.0;
        }
        if p < 0.5 {
            return -probit(1.0 - p);
        }
        let mut lo = 0.0f64;
        let mut hi = 40.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if phi(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

}
