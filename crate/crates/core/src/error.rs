use thiserror::Error;

use crate::anc::AncRunReport;
use crate::pinn::TrainReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("receiver coincides with source (distance {distance:e} m)")]
    ZeroDistance { distance: f64 },

    #[error("tone at {frequency} Hz is not below the Nyquist frequency {nyquist} Hz")]
    AboveNyquist { frequency: f64, nyquist: f64 },

    #[error("delay of {delay_samples:.3} samples does not fit in a {num_taps}-tap filter")]
    DelayExceedsFilter { delay_samples: f64, num_taps: usize },

    #[error("signal has no samples")]
    EmptySignal,

    #[error("no signals supplied")]
    EmptySignals,

    #[error("signals are not combinable: {0}")]
    SignalMismatch(String),

    #[error("microphone radius {found} m differs from {expected} m")]
    RadiusMismatch { expected: f64, found: f64 },

    #[error("reference power is zero")]
    ZeroDenominator,

    #[error("buffer holds {len} samples, need at least {needed}")]
    BufferTooShort { len: usize, needed: usize },

    #[error("training diverged at epoch {epoch}")]
    DivergenceDetected { epoch: usize, report: Box<TrainReport> },

    #[error("adaptive filter diverged at iteration {iteration}")]
    Diverged { iteration: usize, report: Box<AncRunReport> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),
}
