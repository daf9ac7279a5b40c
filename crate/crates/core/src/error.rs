// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested dimension or parameter exceeds a hard capacity limit.
    #[error("capacity exceeded: {what} is {value}, limit is {limit}")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    /// The photon budget ran out before the raw key was complete.
    #[error("photon budget of {0} exhausted before the raw key was complete")]
    PhotonBudget(u64),

    /// No parameter choice satisfies the requested target.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Alice holds no usable key bit; the protocol has to start over.
    #[error("no usable key bit; restart required")]
    RestartRequired,

    /// Too few known key bits to reveal any for error estimation.
    #[error("insufficient key: {known} known bit(s), at least 2 required")]
    InsufficientKey { known: usize },

    /// The measured error rate is above the acceptance threshold.
    #[error("error rate {rate:.4} exceeds threshold {threshold:.4}")]
    ErrorRateTooHigh { rate: f64, threshold: f64 },

    #[error(transparent)]
    Wire(#[from] crate::wire::WireError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
