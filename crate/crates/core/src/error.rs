use thiserror::Error;

use crate::harness::VerificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation is defined on.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Accuracy/error-probability pair outside the open unit square.
    #[error(
        "invalid precision: delta_err={delta_err}, p_err={p_err} \
         (both must lie strictly between 0 and 1)"
    )]
    InvalidPrecision { delta_err: f64, p_err: f64 },

    /// `observe` called on an estimator whose stopping rule already fired.
    #[error("estimator already terminated; observing further samples would corrupt the stopping rule")]
    AlreadyTerminated,

    /// `finish` called before the stopping rule fired.
    #[error("estimator has not terminated; no estimate is available yet")]
    NotTerminated,

    /// A caller-supplied sample cap was reached before termination.
    /// Carries the partial counters for diagnostics.
    #[error(
        "sample budget exhausted: {samples} samples taken ({distinct} distinct, \
         weighted count {weighted}) without reaching the repeat threshold"
    )]
    BudgetExhausted {
        samples: u64,
        distinct: u64,
        weighted: u128,
    },

    /// A trial used more samples than the deterministic cap `n + ceil(k_err)`.
    /// This cap holds on every run, so seeing this means the estimator or the
    /// sampling source is broken.
    #[error("hard cap violated: trial {trial} used {samples} samples, cap is {cap}")]
    HardCapViolated { trial: u64, samples: u64, cap: u64 },

    /// A trial failed and aborted the batch; completed trials are aggregated
    /// into the attached partial report.
    #[error("verification batch aborted at trial {trial}: {source}")]
    BatchAborted {
        trial: u64,
        #[source]
        source: Box<Error>,
        partial: Box<VerificationReport>,
    },

    /// Input file contained no lines.
    #[error("input file has no lines: {path}")]
    EmptyFile { path: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Error {
        Error::Domain(msg.into())
    }
}
