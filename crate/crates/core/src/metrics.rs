//! Analytic training-time model, accuracy gain over time (AGOT), and the
//! energy / CO2e estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default AGOT exponent parameter.
pub const DEFAULT_EPSILON: f64 = 0.95;
/// Power usage effectiveness multiplier.
pub const DEFAULT_PUE: f64 = 1.58;
/// Pounds of CO2e per kWh.
pub const DEFAULT_CO2_PER_KWH: f64 = 0.954;

/// Per-batch cost of a forward and a backward pass, in arbitrary time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub t_forward: f64,
    pub t_backward: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            t_forward: 1.0,
            t_backward: 2.0,
        }
    }
}

impl TimingModel {
    pub fn new(t_forward: f64, t_backward: f64) -> Result<Self> {
        if !(t_forward > 0.0 && t_backward > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pass times must be positive (t_forward={t_forward}, t_backward={t_backward})"
            )));
        }
        Ok(TimingModel { t_forward, t_backward })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipFractions {
    /// Batches on which only the backward pass was skipped.
    pub alpha_b: f64,
    /// Batches on which both passes were skipped.
    pub alpha_fb: f64,
}

impl SkipFractions {
    pub fn new(alpha_b: f64, alpha_fb: f64) -> Result<Self> {
        let valid =
            (0.0..=1.0).contains(&alpha_b) && (0.0..=1.0).contains(&alpha_fb) && alpha_b + alpha_fb <= 1.0 + 1e-12;
        if !valid {
            return Err(Error::InvalidSkipFractions { alpha_b, alpha_fb });
        }
        Ok(SkipFractions { alpha_b, alpha_fb })
    }

    pub fn from_counts(backward_skipped: u64, forward_skipped: u64, total: u64) -> Result<Self> {
        if total == 0 {
            return Self::new(0.0, 0.0);
        }
        let t = total as f64;
        Self::new(backward_skipped as f64 / t, forward_skipped as f64 / t)
    }

    pub fn combined(&self) -> f64 {
        self.alpha_b + self.alpha_fb
    }
}

/// `T = M * [alpha_b * T_f + (1 - alpha_b - alpha_fb) * (T_f + T_b)]`.
pub fn total_time(fractions: SkipFractions, timing: TimingModel, num_batches: u64) -> Result<f64> {
    let SkipFractions { alpha_b, alpha_fb } = SkipFractions::new(fractions.alpha_b, fractions.alpha_fb)?;
    let full = (1.0 - alpha_b - alpha_fb).max(0.0);
    let per_batch = alpha_b * timing.t_forward + full * (timing.t_forward + timing.t_backward);
    Ok(num_batches as f64 * per_batch)
}

pub fn t_norm(t_ours: f64, t_all: f64) -> Result<f64> {
    if !(t_all > 0.0) {
        return Err(Error::NonPositiveReferenceTime(t_all));
    }
    Ok(t_ours / t_all)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgotParams {
    pub epsilon: f64,
    /// Accuracy before training.
    pub a_base: f64,
    /// Accuracy of full training.
    pub a_full: f64,
}

impl AgotParams {
    pub fn new(a_base: f64, a_full: f64) -> Self {
        AgotParams {
            epsilon: DEFAULT_EPSILON,
            a_base,
            a_full,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Normalized accuracy gain divided by `T_norm^(1 - epsilon)`.
pub fn agot(accuracy: f64, t_norm: f64, params: AgotParams) -> Result<f64> {
    if !(t_norm > 0.0) {
        return Err(Error::NonPositiveNormalizedTime(t_norm));
    }
    let span = params.a_full - params.a_base;
    if span == 0.0 {
        return Err(Error::DegenerateAgot(params.a_full));
    }
    let gain = (accuracy - params.a_base) / span;
    Ok(gain / t_norm.powf(1.0 - params.epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Average CPU power draw, watts.
    pub p_cpu: f64,
    /// Average DRAM power draw, watts.
    pub p_dram: f64,
    /// Average power draw per GPU, watts.
    pub p_gpu: f64,
    pub gpu_count: f64,
    /// Training time, hours.
    pub hours: f64,
    pub pue: f64,
    pub co2_per_kwh: f64,
}

impl EnergyParams {
    pub fn new(p_cpu: f64, p_dram: f64, p_gpu: f64, gpu_count: f64, hours: f64) -> Self {
        EnergyParams {
            p_cpu,
            p_dram,
            p_gpu,
            gpu_count,
            hours,
            pue: DEFAULT_PUE,
            co2_per_kwh: DEFAULT_CO2_PER_KWH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub kwh: f64,
    pub co2e_lbs: f64,
}

/// `p_t = PUE * t * (p_c + p_r + g * p_g) / 1000`, `CO2e = 0.954 * p_t`.
pub fn energy_co2(params: EnergyParams) -> Energy {
    let watts = params.p_cpu + params.p_dram + params.gpu_count * params.p_gpu;
    let kwh = params.pue * params.hours * watts / 1000.0;
    Energy {
        kwh,
        co2e_lbs: params.co2_per_kwh * kwh,
    }
}
