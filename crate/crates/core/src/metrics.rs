//! Steady-state measurements of an extracted channel against its clean
//! reference: lag in samples, amplitude ratio and residual RMS.
//!
//! All three use the same window. It lies in the final 80% of the record,
//! keeps half a period of margin on both sides for the lag search, and
//! spans a whole number of periods so a sinusoid's cross terms cancel.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Fraction of the record discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.2;

/// Whole-period window for a record of `len` samples with the given
/// period (in samples). Fails when not even one period fits.
pub fn steady_window(len: usize, period_samples: f64) -> Result<Range<usize>> {
    if !(period_samples >= 2.0 && period_samples.is_finite()) {
        return Err(Error::InvalidScenario(format!("period of {period_samples} samples is too short")));
    }
    let margin = max_shift(period_samples);
    let start = (len as f64 * TRANSIENT_FRACTION).ceil() as usize + margin;
    let end = len.saturating_sub(margin);
    let available = end.saturating_sub(start) as f64;
    let periods = (available / period_samples).floor();
    if periods < 1.0 {
        return Err(Error::InvalidScenario(format!(
            "{len} samples do not hold one full steady-state period of {period_samples:.1} samples"
        )));
    }
    let width = (periods * period_samples).round() as usize;
    Ok(end - width..end)
}

fn max_shift(period_samples: f64) -> usize {
    (period_samples / 2.0).ceil() as usize
}

fn check_lengths(x: &[f64], reference: &[f64], window: &Range<usize>) -> Result<()> {
    if x.len() != reference.len() || window.end > x.len() || window.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Delay of `x` behind `reference` in samples (positive when `x` lags).
///
/// Maximizes `sum_{k in window} x[k] reference[k - L]` over integer shifts
/// within half a period, then refines with a parabola through the peak and
/// its neighbours.
pub fn lag_steps(x: &[f64], reference: &[f64], window: &Range<usize>, period_samples: f64) -> Result<f64> {
    check_lengths(x, reference, window)?;
    let shift = max_shift(period_samples) as isize;
    if (window.start as isize) < shift || window.end as isize + shift > x.len() as isize {
        return Err(Error::InvalidScenario("window leaves no room for the lag search".into()));
    }
    let correlation = |lag: isize| -> f64 {
        window
            .clone()
            .map(|k| x[k] * reference[(k as isize - lag) as usize])
            .sum()
    };
    let scores: Vec<f64> = (-shift..=shift).map(correlation).collect();
    let (best, _) = scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    let mut lag = best as f64 - shift as f64;
    if best > 0 && best + 1 < scores.len() {
        let (left, mid, right) = (scores[best - 1], scores[best], scores[best + 1]);
        let curvature = left - 2.0 * mid + right;
        if curvature < 0.0 {
            lag += 0.5 * (left - right) / curvature;
        }
    }
    Ok(lag)
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// `rms(x) / rms(reference)` over the window.
pub fn amplitude_ratio(x: &[f64], reference: &[f64], window: &Range<usize>) -> Result<f64> {
    check_lengths(x, reference, window)?;
    Ok(rms(&x[window.clone()]) / rms(&reference[window.clone()]))
}

/// RMS of `x - reference` over the window.
pub fn residual_rms(x: &[f64], reference: &[f64], window: &Range<usize>) -> Result<f64> {
    check_lengths(x, reference, window)?;
    let diff: Vec<f64> = window.clone().map(|k| x[k] - reference[k]).collect();
    Ok(rms(&diff))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// State `x_i` of the tracker.
    Raw,
    /// Compensated estimate `xhat_i`.
    Compensated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMetrics {
    pub kind: ChannelKind,
    /// 1-based channel number: `x_i` or `xhat_i` is compared with the
    /// `(i-1)`-th derivative of the clean reference.
    pub channel: usize,
    pub lag_steps: f64,
    pub amplitude_ratio: f64,
    pub residual_rms: f64,
}

impl ChannelMetrics {
    pub fn measure(
        kind: ChannelKind,
        channel: usize,
        x: &[f64],
        reference: &[f64],
        window: &Range<usize>,
        period_samples: f64,
    ) -> Result<Self> {
        Ok(Self {
            kind,
            channel,
            lag_steps: lag_steps(x, reference, window, period_samples)?,
            amplitude_ratio: amplitude_ratio(x, reference, window)?,
            residual_rms: residual_rms(x, reference, window)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MetricsReport {
    pub channels: Vec<ChannelMetrics>,
}

impl MetricsReport {
    pub fn get(&self, kind: ChannelKind, channel: usize) -> Option<&ChannelMetrics> {
        self.channels.iter().find(|c| c.kind == kind && c.channel == channel)
    }

    pub fn raw(&self, channel: usize) -> Option<&ChannelMetrics> {
        self.get(ChannelKind::Raw, channel)
    }

    pub fn compensated(&self, channel: usize) -> Option<&ChannelMetrics> {
        self.get(ChannelKind::Compensated, channel)
    }
}
