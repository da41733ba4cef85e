use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The request is valid but outside the domain of the function (e.g. a zero drive amplitude).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not implemented for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The problem is too large for a dense representation.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error(
        "pfaffian breakdown at elimination step {step}: pivot ratio {pivot_ratio:e} ({detail})"
    )]
    PfaffianBreakdown {
        step: usize,
        pivot_ratio: f64,
        detail: String,
    },

    /// No peak passed the surge heuristics; carries the global maximum of the series.
    #[error("no qualifying peak found; global maximum {fallback_value} at t = {fallback_time}")]
    PeakDetection {
        fallback_time: f64,
        fallback_value: f64,
    },

    #[error("regression error: {0}")]
    Regression(String),

    /// Root bracketing failed; `trace` lists (t/t_F, integrand value) samples.
    #[error("surge estimate failed: {message}")]
    Estimation {
        message: String,
        trace: Vec<(f64, f64)>,
    },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("readout channel not invertible: p_fp + p_fn = {0} >= 1")]
    ChannelNotInvertible(f64),

    #[error("theory correlator at distance {ell} is below the division floor ({value:e})")]
    DivisionGuard { ell: usize, value: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
