//! Turning hard assignments over time into driver segments.

use serde::{Deserialize, Serialize};

use crate::data::QuarterIndex;
use crate::error::{Result, SwapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Driver {
    /// `z = 1`: X is the explanatory variable.
    XDrives,
    /// `z = 0`: Y is the explanatory variable.
    YDrives,
}

impl Driver {
    pub fn from_z(z: u8) -> Self {
        if z == 1 {
            Driver::XDrives
        } else {
            Driver::YDrives
        }
    }

    pub fn z(self) -> u8 {
        match self {
            Driver::XDrives => 1,
            Driver::YDrives => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: QuarterIndex,
    /// Inclusive.
    pub end: QuarterIndex,
    pub driver: Driver,
}

impl Segment {
    pub fn quarters(&self) -> i64 {
        self.end.ordinal() - self.start.ordinal() + 1
    }
}

/// Centered running median of a 0/1 sequence (a majority vote), with the
/// ends padded by repeating the first and last values.
pub fn median_filter(z: &[u8], window: usize) -> Result<Vec<u8>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(SwapError::InvalidConfig(format!("smoothing window must be odd and positive, got {window}")));
    }
    let n = z.len();
    let half = window / 2;
    Ok((0..n)
        .map(|i| {
            let ones = (0..window)
                .filter(|&k| {
                    let j = (i + k).saturating_sub(half).min(n - 1);
                    z[j] == 1
                })
                .count();
            u8::from(ones > half)
        })
        .collect())
}

/// Smooths `z` and splits it into maximal constant runs.
pub fn timeline_segments(z: &[u8], index: &[QuarterIndex], smooth_window: usize) -> Result<Vec<Segment>> {
    if z.len() != index.len() {
        return Err(SwapError::LengthMismatch(z.len(), index.len()));
    }
    let smoothed = median_filter(z, smooth_window)?;
    let mut out: Vec<Segment> = Vec::new();
    for (&zi, &q) in smoothed.iter().zip(index) {
        let driver = Driver::from_z(zi);
        match out.last_mut() {
            Some(seg) if seg.driver == driver => seg.end = q,
            _ => out.push(Segment { start: q, end: q, driver }),
        }
    }
    Ok(out)
}

/// Expands segments back into one assignment per quarter of `index`.
pub fn expand_segments(segments: &[Segment], index: &[QuarterIndex]) -> Vec<Option<u8>> {
    index.iter().map(|q| segments.iter().find(|s| s.start <= *q && *q <= s.end).map(|s| s.driver.z())).collect()
}
