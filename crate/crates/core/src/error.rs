use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent inputs (chart mismatch, off-surface sample, bad sizes).
    #[error("usage error: {0}")]
    Usage(String),

    /// A gradient or value came out non-finite.
    #[error("numeric domain error: non-finite {what} for coordinate `{label}`")]
    NonFinite { what: &'static str, label: String },

    /// A point outside the chart's admissible domain, or a formula evaluated at an excluded point.
    #[error("domain error: {0}")]
    Domain(String),

    /// The constraint matrix is singular at the given point.
    #[error("system not Second Class here: |det M| = {det:e} <= {threshold:e} at {point:?}")]
    Degenerate {
        det: f64,
        threshold: f64,
        point: Vec<f64>,
    },

    #[error("blow-up: coordinate {index} reached {value:e} at t = {time}")]
    BlowUp { index: usize, value: f64, time: f64 },

    /// An integration stopped early. `partial` holds every step completed before the failure.
    #[error("flow interrupted at step {step}: {cause}")]
    FlowInterrupted {
        step: usize,
        cause: Box<Error>,
        partial: Box<Trajectory>,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for failures caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Usage(_) => false,
            Error::FlowInterrupted { cause, .. } => cause.is_numerical(),
            _ => true,
        }
    }
}
