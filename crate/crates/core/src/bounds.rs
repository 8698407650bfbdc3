//! Closed-form bounds for the repeat-counting cardinality estimator.
//!
//! Everything here is a pure function of its arguments. The central quantity
//! is the repeat threshold
//!
//! ```text
//! k_err = (4 / delta_err^2) * ln(3 / p_err)
//! ```
//!
//! Sampling stops once the number of repeated draws reaches `k_err`, and the
//! estimator then satisfies the `(1 +/- delta_err, 1 - p_err)` guarantee while
//! drawing at most `min(n, 2*ceil(sqrt(k_err*n))) + ceil(k_err)` samples with
//! probability greater than `1 - p_err`, and at most `n + ceil(k_err)` samples
//! unconditionally.
//!
//! The tail functions bound the probability of each of the three failure
//! events (overestimate, underestimate, too many samples); each is strictly
//! below `p_err / 3`. They are computed in log space, so extreme parameters
//! can underflow to `0.0`, which means "below the smallest positive double",
//! not exactly zero.

use crate::error::{Error, Result};

/// Accuracy target: relative error `delta_err` and total error probability
/// `p_err`, both strictly inside (0, 1).
///
/// `delta_err >= 1` is rejected because the trivial all-zero estimate would
/// already satisfy it; `p_err` on the closed boundary makes either the
/// threshold formula or the guarantee itself degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    delta_err: f64,
    p_err: f64,
}

impl Precision {
    pub fn new(delta_err: f64, p_err: f64) -> Result<Precision> {
        let open_unit = |x: f64| x.is_finite() && x > 0.0 && x < 1.0;
        if !open_unit(delta_err) || !open_unit(p_err) {
            return Err(Error::InvalidPrecision { delta_err, p_err });
        }
        Ok(Precision { delta_err, p_err })
    }

    pub fn delta_err(&self) -> f64 {
        self.delta_err
    }

    pub fn p_err(&self) -> f64 {
        self.p_err
    }
}

/// The repeat-count threshold `4/delta_err^2 * ln(3/p_err)`.
///
/// Always greater than `4*ln(3) ~ 4.394`. Produced by [`compute_k_err`];
/// the raw constructor exists for callers that need to explore the budget
/// formula over arbitrary thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KErr {
    value: f64,
}

impl KErr {
    /// Accepts any positive finite threshold small enough that `ceil(value)`
    /// fits a `u64` sample count.
    pub fn new(value: f64) -> Result<KErr> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::domain(format!(
                "repeat threshold must be positive and finite, got {value}"
            )));
        }
        if value >= 9.2e18 {
            return Err(Error::domain(format!(
                "repeat threshold {value} exceeds the supported sample-count range"
            )));
        }
        Ok(KErr { value })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    /// `ceil(k_err)` as an integer sample count.
    pub fn ceil(self) -> u64 {
        self.value.ceil() as u64
    }
}

/// Repeat threshold for a precision target: `4/delta_err^2 * ln(3/p_err)`.
///
/// Errors if the threshold overflows the supported sample-count range
/// (only possible for delta_err so small that no practical budget exists).
pub fn compute_k_err(p: Precision) -> Result<KErr> {
    let d = p.delta_err();
    KErr::new(4.0 / (d * d) * (3.0 / p.p_err()).ln())
}

/// Exact `ceil(sqrt(x))` for a non-negative finite double.
///
/// Uses the identity `ceil(sqrt(x)) = ceil(sqrt(ceil(x)))` (an integer c
/// satisfies c^2 >= x iff c^2 >= ceil(x)), then takes an exact integer
/// square root. A bare `x.sqrt().ceil()` misrounds when sqrt(x) lands within
/// half an ulp of an integer, which silently shifts the sample budget by 2.
pub(crate) fn ceil_sqrt(x: f64) -> u128 {
    debug_assert!(x.is_finite() && x >= 0.0);
    if x <= 0.0 {
        return 0;
    }
    let m = x.ceil() as u128;
    let r = m.isqrt();
    if r * r == m {
        r
    } else {
        r + 1
    }
}

/// The high-probability sample budget `min(n, 2*ceil(sqrt(k*n))) + ceil(k)`:
/// an upper bound on draws that holds with probability greater than
/// `1 - p_err/3`.
///
/// The square root is taken of the double-precision product `k*n` and the
/// ceiling is exact (see [`ceil_sqrt`]).
pub fn sample_budget(n: u64, k: KErr) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("set cardinality n must be at least 1"));
    }
    let root = ceil_sqrt(k.value() * n as f64);
    let bulk = (n as u128).min(2 * root);
    u64::try_from(bulk + k.ceil() as u128)
        .map_err(|_| Error::domain("sample budget exceeds the u64 range"))
}

/// The deterministic cap `n + ceil(k)`: `n + k_err` samples always contain at
/// least `k_err` repeats, so no run can draw more than this.
pub fn hard_cap(n: u64, k: KErr) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("set cardinality n must be at least 1"));
    }
    n.checked_add(k.ceil())
        .ok_or_else(|| Error::domain("hard cap exceeds the u64 range"))
}

fn require_nonneg(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::domain(format!(
            "{name} must be non-negative and finite, got {x}"
        )))
    }
}

/// Lower Chernoff tail for a sum X of independent 0-1 variables:
///
/// ```text
/// Pr[X <= (1 - delta) E[X]] <= exp(-delta^2 E[X] / 2)
/// ```
pub fn chernoff_lower_tail(delta: f64, expectation: f64) -> Result<f64> {
    let d = require_nonneg("delta", delta)?;
    let e = require_nonneg("expectation", expectation)?;
    Ok((-d * d * e / 2.0).exp())
}

/// Upper Chernoff tail for a sum X of independent 0-1 variables:
///
/// ```text
/// Pr[X >= (1 + delta) E[X]] <= exp(-delta^2 E[X] / (2 + delta))
/// ```
pub fn chernoff_upper_tail(delta: f64, expectation: f64) -> Result<f64> {
    let d = require_nonneg("delta", delta)?;
    let e = require_nonneg("expectation", expectation)?;
    Ok((-d * d * e / (2.0 + d)).exp())
}

/// Probability that the estimator terminates with a relative overestimate of
/// exactly `delta > delta_err`:
///
/// ```text
/// (p_err/3) ^ (2 delta^2 / (delta_err^2 (1 + delta)))
/// ```
///
/// Strictly below `p_err/3` on its whole domain.
pub fn overestimate_tail(delta: f64, p: Precision) -> Result<f64> {
    if !delta.is_finite() || delta <= p.delta_err() {
        return Err(Error::domain(format!(
            "overestimate deviation delta={delta} must exceed delta_err={}",
            p.delta_err()
        )));
    }
    let de = p.delta_err();
    let exponent = 2.0 * delta * delta / (de * de * (1.0 + delta));
    Ok((exponent * (p.p_err() / 3.0).ln()).exp())
}

/// Probability that the estimator terminates with a relative underestimate of
/// exactly `delta`, `delta_err < delta < 1`:
///
/// ```text
/// (p_err/3) ^ (4 delta^2 / (delta_err^2 (2 - delta)))
/// ```
///
/// Strictly below `p_err/3` on its whole domain.
pub fn underestimate_tail(delta: f64, p: Precision) -> Result<f64> {
    if !delta.is_finite() || delta <= p.delta_err() || delta >= 1.0 {
        return Err(Error::domain(format!(
            "underestimate deviation delta={delta} must lie in (delta_err, 1) with delta_err={}",
            p.delta_err()
        )));
    }
    let de = p.delta_err();
    let exponent = 4.0 * delta * delta / (de * de * (2.0 - delta));
    Ok((exponent * (p.p_err() / 3.0).ln()).exp())
}

/// Probability that `2*ceil(sqrt(k_err*n))` distinct samples arrive before
/// `k_err` repeats do, i.e. that the high-probability budget is exceeded:
///
/// ```text
/// exp(-k_err/4) = (p_err/3) ^ (1/delta_err^2)
/// ```
///
/// Strictly below `p_err/3`.
pub fn repeat_shortfall_tail(p: Precision) -> f64 {
    let de = p.delta_err();
    ((p.p_err() / 3.0).ln() / (de * de)).exp()
}
