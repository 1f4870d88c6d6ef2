//! Online event-boundary detection from the prediction-error stream.
//!
//! The error magnitude `V` is normalized against a sliding window of its own
//! recent history; a boundary is declared when the normalized value `b`
//! leaves the band `[-b_event, b_event]`. The window deliberately holds only
//! *previous* samples, so a fresh spike is judged against history it has not
//! yet contaminated.

use std::collections::VecDeque;

/// Sliding window over recent `V` values with population mean and variance.
#[derive(Clone, Debug)]
pub struct WindowStats {
    capacity: usize,
    buf: VecDeque<f64>,
    mean: f64,
    variance: f64,
}

impl WindowStats {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        WindowStats {
            capacity,
            buf: VecDeque::with_capacity(capacity + 1),
            mean: 0.0,
            variance: 0.0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Window has reached capacity; detection stays disabled before this.
    pub fn is_full(&self) -> bool {
        self.buf.len() == self.capacity
    }

    /// Mean of the stored samples; 0 while empty.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance of the stored samples; 0 while empty.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Insert a sample, evicting the oldest once at capacity.
    ///
    /// Mean and variance are recomputed from the buffer in two passes on
    /// every push. Incremental update formulas cancel catastrophically here:
    /// the stream spans ~28 orders of magnitude, and under eviction the
    /// running sums lose all significance long before the 1e-9 drift budget.
    /// At the default window of 1000 samples the recompute is microseconds.
    pub fn push(&mut self, v: f64) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(v);
        let n = self.buf.len() as f64;
        let mean = self.buf.iter().sum::<f64>() / n;
        let variance = self
            .buf
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / n;
        self.mean = mean;
        self.variance = variance;
    }
}

/// Detector thresholds.
#[derive(Clone, Debug)]
pub struct DetectorConfig {
    /// Boundary fires when |b| exceeds this.
    pub b_event: f64,
    /// Seconds after a boundary during which detection is suppressed.
    pub refractory: f64,
    /// Lower bound on sigma in the normalization; absorbs a window of
    /// numerically identical samples.
    pub sigma_floor: f64,
}

impl DetectorConfig {
    pub fn new(b_event: f64, refractory: f64, sigma_floor: f64) -> Self {
        assert!(b_event > 0.0);
        assert!(refractory >= 0.0);
        assert!(sigma_floor > 0.0);
        DetectorConfig {
            b_event,
            refractory,
            sigma_floor,
        }
    }
}

/// A detected event boundary with the statistics snapshot that triggered it.
#[derive(Clone, Debug, PartialEq)]
pub struct EventBoundary {
    pub time: f64,
    pub b_value: f64,
    pub v_value: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Normalized prediction error `(v - mu) / max(sigma, sigma_floor)`.
pub fn b_metric(v: f64, mu: f64, sigma: f64, sigma_floor: f64) -> f64 {
    (v - mu) / sigma.max(sigma_floor)
}

/// Threshold rule: emit a boundary iff the window is warm, |b| exceeds the
/// threshold, and no boundary fired within the refractory period.
#[allow(clippy::too_many_arguments)]
pub fn detect(
    b: f64,
    t: f64,
    v: f64,
    mu: f64,
    sigma: f64,
    warm: bool,
    last_event: Option<f64>,
    cfg: &DetectorConfig,
) -> Option<EventBoundary> {
    if !warm || b.abs() <= cfg.b_event {
        return None;
    }
    if let Some(prev) = last_event {
        if t - prev < cfg.refractory {
            return None;
        }
    }
    Some(EventBoundary {
        time: t,
        b_value: b,
        v_value: v,
        mu,
        sigma,
    })
}
