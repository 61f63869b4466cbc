//! Right-censored samples, Kaplan-Meier survival curves, and jump weights.
//!
//! A sample holds the ordered pairs `(X_j, delta_j)` together with the jump
//! heights `s_j` of the Kaplan-Meier survival estimate. The weights always sum
//! to one: the last order statistic carries the whole remaining mass
//! `S(X_n)` as a jump regardless of its censoring status, which is what the
//! weighted kernel sums and the empirical characteristic function require.
//!
//! Ties are broken by placing events before censorings at the same time (the
//! standard product-limit convention; continuous models never tie).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One observation: the recorded time `min(lifetime, censoring)` and the
/// event indicator (`true` = the lifetime was observed, `false` = censored).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredObservation {
    pub time: f64,
    pub event: bool,
}

/// An ordered right-censored sample with Kaplan-Meier jump weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    times: Vec<f64>,
    events: Vec<bool>,
    weights: Vec<f64>,
}

impl CensoredSample {
    /// Order the records by time (events before censorings at ties) and
    /// compute the Kaplan-Meier jump weights.
    pub fn ingest<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        let mut obs: Vec<(f64, bool)> = records.into_iter().collect();
        if obs.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, (t, _)) in obs.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidObservation { index });
            }
        }
        obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let times: Vec<f64> = obs.iter().map(|o| o.0).collect();
        let events: Vec<bool> = obs.iter().map(|o| o.1).collect();
        let weights = km_weights(&events);
        Ok(Self {
            times,
            events,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Ordered observation times `X_1 <= ... <= X_n`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Event indicators, aligned with `times`.
    pub fn events(&self) -> &[bool] {
        &self.events
    }

    /// Kaplan-Meier jump heights `s_j`, aligned with `times`. Nonnegative and
    /// summing to one; zero at every censored position except possibly the
    /// last.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn observations(&self) -> impl Iterator<Item = CensoredObservation> + '_ {
        self.times
            .iter()
            .zip(&self.events)
            .map(|(&time, &event)| CensoredObservation { time, event })
    }

    /// The Kaplan-Meier survival curve of the lifetime distribution.
    pub fn survival(&self) -> SurvivalCurve {
        SurvivalCurve {
            knots: self.times.clone(),
            values: survival_at_knots(&self.events),
        }
    }

    /// The sample with event indicators flipped, so that its Kaplan-Meier
    /// curve estimates the censoring survival `1 - G`.
    pub fn flipped(&self) -> CensoredSample {
        // re-ingest: the tie rule orders the flipped events first
        Self::ingest(
            self.times
                .iter()
                .copied()
                .zip(self.events.iter().map(|e| !e)),
        )
        .expect("flipping a valid sample stays valid")
    }

    /// Kaplan-Meier estimate of the censoring survival function `1 - G`,
    /// obtained by flipping the event indicators.
    pub fn censoring_survival(&self) -> SurvivalCurve {
        self.flipped().survival()
    }

    /// Mean of the times under the jump weights.
    pub fn weighted_mean(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| t * w)
            .sum()
    }

    /// Standard deviation of the times under the jump weights.
    pub fn weighted_sd(&self) -> f64 {
        let mean = self.weighted_mean();
        self.times
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * (t - mean) * (t - mean))
            .sum::<f64>()
            .sqrt()
    }

    /// Plain standard deviation of the times (each observation weighted 1/n).
    pub fn unweighted_sd(&self) -> f64 {
        let n = self.n() as f64;
        let mean = self.times.iter().sum::<f64>() / n;
        (self
            .times
            .iter()
            .map(|t| (t - mean) * (t - mean))
            .sum::<f64>()
            / n)
            .sqrt()
    }

    /// Smallest time whose cumulative jump weight reaches `p` (0 < p < 1).
    pub fn weighted_percentile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let mut cum = 0.0;
        for (t, w) in self.times.iter().zip(&self.weights) {
            cum += w;
            if cum >= p {
                return *t;
            }
        }
        self.times[self.n() - 1]
    }
}

/// Kaplan-Meier survival step function. `values[k]` is the curve's value at
/// the knot `X_k`, i.e. on the interval `(X_{k-1}, X_k]`; the curve is 1
/// before the first knot and 0 past the last.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl SurvivalCurve {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact step-function value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k < t);
        if idx == self.knots.len() {
            0.0
        } else {
            self.values[idx]
        }
    }
}

/// Survival values at the knots: `S(X_k) = prod_{j<k} ((n-j-1)/(n-j))^{delta_j}`
/// (0-based).
fn survival_at_knots(events: &[bool]) -> Vec<f64> {
    let n = events.len();
    let mut values = Vec::with_capacity(n);
    let mut s = 1.0;
    for (k, &event) in events.iter().enumerate() {
        values.push(s);
        if event {
            s *= (n - k - 1) as f64 / (n - k) as f64;
        }
    }
    values
}

/// Jump heights from the survival values: `s_j = S(X_j) - S(X_{j+1})` for
/// `j < n`, and `s_n = S(X_n)`.
fn km_weights(events: &[bool]) -> Vec<f64> {
    let at_knot = survival_at_knots(events);
    let n = at_knot.len();
    let mut w = Vec::with_capacity(n);
    for j in 0..n - 1 {
        w.push(at_knot[j] - at_knot[j + 1]);
    }
    w.push(at_knot[n - 1]);
    w
}
