//! Errors carrying the process exit status.

use std::fmt;

use swapfit_core::SwapError;

pub const EXIT_GENERAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_FIT: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn fit(message: impl Into<String>) -> Self {
        Self { code: EXIT_FIT, message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self { code: EXIT_GENERAL, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SwapError> for Failure {
    fn from(e: SwapError) -> Self {
        match e {
            SwapError::AllRestartsFailed(_) | SwapError::TrustRegionExhausted | SwapError::NonMonotoneFit => {
                Failure::fit(e.to_string())
            }
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::general(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::general(format!("json error: {e}"))
    }
}
