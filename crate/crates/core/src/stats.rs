// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Order statistics and box-plot summaries.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of already sorted data with linear interpolation between order
/// statistics (position `q·(n−1)`).
pub fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    assert!(!s.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    s[lo] + (s[hi] - s[lo]) * frac
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Box-plot statistics with whiskers at the most extreme data points within
/// 1.5 IQR of the quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub min: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn new(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument("box statistics of empty data".into()));
        }
        let s = sorted(xs);
        let q1 = quantile_sorted(&s, 0.25);
        let q3 = quantile_sorted(&s, 0.75);
        let iqr = q3 - q1;
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let whisker_low = s.iter().copied().find(|&v| v >= lo_fence).unwrap_or(s[0]);
        let whisker_high = s.iter().rev().copied().find(|&v| v <= hi_fence).unwrap_or(s[s.len() - 1]);
        Ok(Self {
            n: s.len(),
            mean: mean(&s),
            median: quantile_sorted(&s, 0.5),
            q1,
            q3,
            whisker_low,
            whisker_high,
            min: s[0],
            max: s[s.len() - 1],
        })
    }
}

/// Two-sided percentile interval of a bootstrap distribution.
pub fn percentile_interval(samples: &[f64], level: f64) -> (f64, f64) {
    let s = sorted(samples);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&s, tail), quantile_sorted(&s, 1.0 - tail))
}

/// Percentile interval of the bootstrap distribution shifted by its bias
/// `mean(samples) − θ̂`. Resampling shot-noise-limited data adds a second
/// layer of noise, which moves fidelity-type statistics systematically.
pub fn bias_corrected_interval(estimate: f64, samples: &[f64], level: f64) -> (f64, f64) {
    let bias = mean(samples) - estimate;
    let (lo, hi) = percentile_interval(samples, level);
    (lo - bias, hi - bias)
}

/// Basic (pivotal) bootstrap interval `[2θ̂ − q_hi, 2θ̂ − q_lo]`.
pub fn basic_interval(estimate: f64, samples: &[f64], level: f64) -> (f64, f64) {
    let (lo, hi) = percentile_interval(samples, level);
    (2.0 * estimate - hi, 2.0 * estimate - lo)
}

pub fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Two-sided exact sign test p-value for `wins` successes out of `n`
/// non-tied trials.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let k = wins.min(n - wins);
    let mut tail = 0.0;
    for i in 0..=k {
        tail += binomial(n, i);
    }
    (2.0 * tail / 2f64.powi(n as i32)).min(1.0)
}

/// One-sided sign test p-value for at least `wins` successes out of `n`.
pub fn sign_test_p_greater(wins: usize, n: usize) -> f64 {
    let mut tail = 0.0;
    for i in wins..=n {
        tail += binomial(n, i);
    }
    tail / 2f64.powi(n as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}
