//! Closed-form acquisition functions over a Gaussian predictive
//! distribution, and the per-iteration β sampler for UCB.

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

/// Standard normal CDF via `erfc`, accurate in both tails.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P[f̂ > y_best] for f̂ ~ N(mean, std²). With `std == 0` the answer is the
/// deterministic indicator.
pub fn prob_improvement(mean: f64, std: f64, y_best: f64) -> f64 {
    if std > 0.0 {
        norm_cdf((mean - y_best) / std)
    } else if mean > y_best {
        1.0
    } else {
        0.0
    }
}

/// E[max(0, f̂ − y_best)] for f̂ ~ N(mean, std²).
pub fn expected_improvement(mean: f64, std: f64, y_best: f64) -> f64 {
    let gain = mean - y_best;
    if std > 0.0 {
        let z = gain / std;
        let ei = gain * norm_cdf(z) + std * norm_pdf(z);
        // Rounding can leave a tiny negative value deep in the lower tail.
        ei.max(gain.max(0.0))
    } else {
        gain.max(0.0)
    }
}

pub fn ucb(mean: f64, std: f64, beta: f64) -> f64 {
    mean + beta * std
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AcquisitionSpec {
    Pi { y_best: f64 },
    Ei { y_best: f64 },
    Ucb { beta: f64 },
}

impl AcquisitionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AcquisitionSpec::Ucb { beta } if !(beta >= 0.0) => {
                Err(Error::input(format!("UCB beta must be >= 0, got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Acquisition value from a posterior mean and variance.
    pub fn evaluate(&self, mean: f64, variance: f64) -> f64 {
        let std = variance.max(0.0).sqrt();
        match *self {
            AcquisitionSpec::Pi { y_best } => prob_improvement(mean, std, y_best),
            AcquisitionSpec::Ei { y_best } => expected_improvement(mean, std, y_best),
            AcquisitionSpec::Ucb { beta } => ucb(mean, std, beta),
        }
    }
}

/// β = 10^u with u ~ Uniform[log10_low, log10_high].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub log10_low: f64,
    pub log10_high: f64,
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule {
            log10_low: -2.0,
            log10_high: 0.0,
        }
    }
}

impl BetaSchedule {
    pub fn new(log10_low: f64, log10_high: f64) -> Result<Self> {
        if !(log10_low <= log10_high) || !log10_low.is_finite() || !log10_high.is_finite() {
            return Err(Error::input(format!(
                "beta schedule needs log10_low <= log10_high, got [{log10_low}, {log10_high}]"
            )));
        }
        Ok(BetaSchedule { log10_low, log10_high })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = if self.log10_low < self.log10_high {
            rng.random_range(self.log10_low..=self.log10_high)
        } else {
            self.log10_low
        };
        10f64.powf(u)
    }
}

pub fn sample_beta<R: Rng + ?Sized>(schedule: &BetaSchedule, rng: &mut R) -> f64 {
    schedule.sample(rng)
}
