//! Automatic loss threshold: the mean of the last `K` batch losses.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdState {
    window: VecDeque<f64>,
    capacity: usize,
    low: Option<f64>,
    frozen: bool,
    margin: f64,
}

impl ThresholdState {
    /// `window_size` is clamped to at least 1. Skip margin defaults to 1.0.
    pub fn new(window_size: usize) -> Self {
        let capacity = window_size.max(1);
        ThresholdState {
            window: VecDeque::with_capacity(capacity),
            capacity,
            low: None,
            frozen: false,
            margin: 1.0,
        }
    }

    /// Skip iff `loss < margin * L_low`.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// Threshold pinned to a fixed value, frozen from the start.
    pub fn fixed(value: f64) -> Self {
        ThresholdState {
            window: VecDeque::new(),
            capacity: 1,
            low: Some(value),
            frozen: true,
            margin: 1.0,
        }
    }

    pub fn window_size(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.window.len() == self.capacity
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn window(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().copied()
    }

    /// The moving-average threshold, once the window has filled.
    pub fn low(&self) -> Option<f64> {
        self.low
    }

    /// `margin * L_low`, the value losses are compared against.
    pub fn effective(&self) -> Result<f64> {
        self.low.map(|l| self.margin * l).ok_or(Error::ThresholdUndefined {
            have: self.window.len(),
            need: self.capacity,
        })
    }

    pub fn observe_loss(&mut self, loss: f64) -> Result<()> {
        if self.frozen {
            return Err(Error::ThresholdFrozen);
        }
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(loss);
        if self.is_full() {
            // Recomputed from scratch so the value never drifts from the window.
            self.low = Some(self.window.iter().sum::<f64>() / self.capacity as f64);
        }
        Ok(())
    }

    /// Sample variance (n - 1 denominator) of the window contents; 0 for
    /// fewer than two values.
    pub fn variance(&self) -> f64 {
        let n = self.window.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.window.iter().sum::<f64>() / n as f64;
        self.window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    }

    pub fn is_stable(&self, variance_tolerance: f64) -> bool {
        self.is_full() && self.variance() <= variance_tolerance
    }

    /// Stop updating `L_low`. Idempotent.
    pub fn freeze(&mut self) -> Result<()> {
        if self.frozen {
            return Ok(());
        }
        if !self.is_full() {
            return Err(Error::PartialWindow {
                have: self.window.len(),
                need: self.capacity,
            });
        }
        self.frozen = true;
        Ok(())
    }

    pub fn should_skip_backward(&self, batch_loss: f64) -> Result<bool> {
        Ok(batch_loss < self.effective()?)
    }
}
