//! Identification degree, grading set and the `drk` obstruction number.
//!
//! For a lag `L` the two trajectory matrices compared are
//! `H_{L+1}(x_1..x_T, G)` and `H_L(x_1..x_{T-1}, G)`. When their delta-ranks
//! agree (and are positive) the lag-`L` linear model is computable at
//! tolerance `delta`; a nonzero difference signals an obstruction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_delta, delta_rank};
use crate::trajectory::{equivariant_hankel, GroupRep, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPair {
    pub lag: usize,
    /// `rk_delta(H_{L+1}(x_1..x_T, G))`
    pub rank_extended: usize,
    /// `rk_delta(H_L(x_1..x_{T-1}, G))`
    pub rank_base: usize,
}

impl RankPair {
    pub fn qualifies(&self) -> bool {
        self.rank_base > 0 && self.rank_extended == self.rank_base
    }

    pub fn drk(&self) -> i64 {
        self.rank_extended as i64 - self.rank_base as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    /// Smallest qualifying lag, or 0 when none qualifies.
    pub degree: usize,
    /// Qualifying lags among those examined.
    pub grading_set: Vec<usize>,
    pub rank_trace: Vec<RankPair>,
    pub delta: f64,
}

/// Largest lag considered: `floor((T + 1) / 2)`.
pub fn max_search_lag(samples: usize) -> usize {
    samples.div_ceil(2)
}

fn check_inputs(series: &TimeSeries, delta: f64) -> Result<()> {
    check_delta(delta)?;
    if series.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            available: series.len(),
        });
    }
    Ok(())
}

/// Both delta-ranks at lag `L`.
pub fn rank_pair(series: &TimeSeries, group: &GroupRep, delta: f64, lag: usize) -> Result<RankPair> {
    check_inputs(series, delta)?;
    let t = series.len();
    if lag == 0 || lag + 1 > t {
        return Err(Error::LagOutOfRange { lag, samples: t });
    }
    let head = series.slice(0, t - 1)?;
    let extended = equivariant_hankel(series, group, lag + 1)?;
    let base = equivariant_hankel(&head, group, lag)?;
    Ok(RankPair {
        lag,
        rank_extended: delta_rank(&extended, delta)?.r,
        rank_base: delta_rank(&base, delta)?.r,
    })
}

/// `rk_delta(H_{L+1}(x_1..x_T, G)) - rk_delta(H_L(x_1..x_{T-1}, G))`.
pub fn drk(series: &TimeSeries, group: &GroupRep, delta: f64, lag: usize) -> Result<i64> {
    Ok(rank_pair(series, group, delta, lag)?.drk())
}

/// Every qualifying lag in `1..=floor((T+1)/2)`.
pub fn grading_set(series: &TimeSeries, group: &GroupRep, delta: f64) -> Result<DegreeReport> {
    check_inputs(series, delta)?;
    let lags: Vec<usize> = (1..=max_search_lag(series.len())).collect();
    let trace: Vec<RankPair> = lags
        .par_iter()
        .map(|&l| rank_pair(series, group, delta, l))
        .collect::<Result<_>>()?;
    let grading_set: Vec<usize> = trace.iter().filter(|p| p.qualifies()).map(|p| p.lag).collect();
    Ok(DegreeReport {
        degree: grading_set.first().copied().unwrap_or(0),
        grading_set,
        rank_trace: trace,
        delta,
    })
}

/// Identification degree: the smallest qualifying lag, found by scanning
/// upward and stopping at the first hit.
pub fn degree(series: &TimeSeries, group: &GroupRep, delta: f64) -> Result<DegreeReport> {
    degree_bounded(series, group, delta, None)
}

/// As [`degree`], with an optional ceiling on the lags examined.
pub fn degree_bounded(
    series: &TimeSeries,
    group: &GroupRep,
    delta: f64,
    max_lag: Option<usize>,
) -> Result<DegreeReport> {
    check_inputs(series, delta)?;
    let ceiling = max_search_lag(series.len()).min(max_lag.unwrap_or(usize::MAX));
    let mut trace = Vec::new();
    for lag in 1..=ceiling {
        let pair = rank_pair(series, group, delta, lag)?;
        trace.push(pair);
        if pair.qualifies() {
            return Ok(DegreeReport {
                degree: lag,
                grading_set: vec![lag],
                rank_trace: trace,
                delta,
            });
        }
    }
    Ok(DegreeReport {
        degree: 0,
        grading_set: Vec::new(),
        rank_trace: trace,
        delta,
    })
}

/// Default autocorrelation threshold for [`lag_upper_bound`].
pub const AUTOCORRELATION_THRESHOLD: f64 = 0.367_879_441_171_442_33;

/// Biased, normalized sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            if c0 == 0.0 {
                return 1.0;
            }
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect()
}

/// Ceiling for the lag search: the first positive lag where the
/// autocorrelation drops below 1/e, clamped to `[1, floor((T+1)/2)]`.
pub fn lag_upper_bound(x: &[f64]) -> Result<usize> {
    lag_upper_bound_with(x, AUTOCORRELATION_THRESHOLD)
}

pub fn lag_upper_bound_with(x: &[f64], threshold: f64) -> Result<usize> {
    if x.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            available: x.len(),
        });
    }
    let cap = max_search_lag(x.len());
    let rho = autocorrelation(x, cap);
    let first = rho
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &r)| r < threshold)
        .map_or(cap, |(k, _)| k);
    Ok(first.clamp(1, cap))
}
