//! Market demand models. Orders, inventories, and demand all live in one
//! integer domain, so every sample is an integer >= 0.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-period end-customer demand model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandModel {
    /// Same demand every period.
    Constant { level: u32 },
    /// Integer-uniform on `[lo, hi]` inclusive.
    UniformInt { lo: u32, hi: u32 },
    /// Piecewise integer-uniform; phase lengths must sum to the horizon.
    SeasonalUniform { phases: Vec<SeasonalPhase> },
    /// Normal draw rounded half-away-from-zero, clamped at zero.
    NormalRounded { mean: f64, sd: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonalPhase {
    pub length: u32,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    #[error("period {period} falls outside every seasonal phase (total phase length {total})")]
    PeriodOutsidePhases { period: u32, total: u32 },
}

impl DemandModel {
    /// Inclusive envelope of possible samples, used for the retailer's
    /// market-research hint. Normal demand reports mean +/- 2 sd.
    pub fn range_hint(&self) -> (u32, u32) {
        match self {
            DemandModel::Constant { level } => (*level, *level),
            DemandModel::UniformInt { lo, hi } => (*lo, *hi),
            DemandModel::SeasonalUniform { phases } => {
                let lo = phases.iter().map(|p| p.lo).min().unwrap_or(0);
                let hi = phases.iter().map(|p| p.hi).max().unwrap_or(0);
                (lo, hi)
            }
            DemandModel::NormalRounded { mean, sd } => {
                let lo = (mean - 2.0 * sd).round().max(0.0) as u32;
                let hi = (mean + 2.0 * sd).round().max(0.0) as u32;
                (lo, hi)
            }
        }
    }
}

/// Draw the demand for one period. Pure in (model, period, rng state):
/// replaying the same seed reproduces the identical sequence.
pub fn sample_demand<R: Rng + ?Sized>(
    model: &DemandModel,
    period: u32,
    rng: &mut R,
) -> Result<u32, DemandError> {
    match model {
        DemandModel::Constant { level } => Ok(*level),
        DemandModel::UniformInt { lo, hi } => Ok(rng.random_range(*lo..=*hi)),
        DemandModel::SeasonalUniform { phases } => {
            let mut start = 0u32;
            for phase in phases {
                if period < start + phase.length {
                    return Ok(rng.random_range(phase.lo..=phase.hi));
                }
                start += phase.length;
            }
            Err(DemandError::PeriodOutsidePhases {
                period,
                total: start,
            })
        }
        DemandModel::NormalRounded { mean, sd } => {
            let normal = Normal::new(*mean, *sd).expect("sd > 0 enforced by validation");
            let draw: f64 = normal.sample(rng);
            // round half-away-from-zero, then clamp at 0
            Ok(draw.round().max(0.0) as u32)
        }
    }
}
