//! Scripted baseline agents: the two target-level inventory heuristics,
//! market best-response and Nash-fixed players, and a uniform-random
//! player for fuzzing. Every output is an integer >= 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beer::Observation;
use crate::market::EquilibriumSolution;

/// Policy selection, as written in the scenario file's agent roster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    /// Order up to a constant target; defaults to the stage capacity.
    BaseStock {
        #[serde(default)]
        target: Option<u32>,
    },
    /// Order up to recent-average-sales * lead time plus current backlog.
    TrackingDemand { l_max: u32 },
    /// Play the equilibrium oracle's action every round (market games).
    NashFixed,
    /// Best-respond to the opponents' previous-round actions (market games).
    MyopicBestResponse,
    /// Uniform integer in [lo, hi].
    RandomUniform { lo: u32, hi: u32 },
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("policy {policy} does not apply to {game} games")]
    WrongGame { policy: String, game: String },
    #[error("nash_fixed requires an equilibrium solution for the scenario")]
    MissingEquilibrium,
}

/// Round half-up to an integer after clamping at zero.
pub(crate) fn round_half_up_nonneg(x: f64) -> u32 {
    (x.max(0.0) + 0.5).floor() as u32
}

/// Base-stock order: order the shortfall of the inventory position
/// (on-hand - backlog + on-order) below the target level.
pub fn base_stock_order(obs: &Observation, target: u32) -> u32 {
    let gap = i64::from(target) - obs.inventory_position();
    gap.max(0) as u32
}

/// Tracking-demand order: average the last `l_max` sales (missing entries
/// count as zero, the divisor stays `l_max`), set the target to
/// round(avg * lead_time) + backlog, and order the shortfall below it.
pub fn tracking_demand_order(obs: &Observation, lead_time: u32, l_max: u32) -> u32 {
    let recent: u64 = obs
        .recent_sales
        .iter()
        .rev()
        .take(l_max as usize)
        .map(|s| u64::from(*s))
        .sum();
    let avg_sales = recent as f64 / f64::from(l_max.max(1));
    let target =
        i64::from(round_half_up_nonneg(avg_sales * f64::from(lead_time)))
            + i64::from(obs.backlog_to_downstream);
    (target - obs.inventory_position()).max(0) as u32
}

/// Cournot best response to the opponents' last-round quantities:
/// (a - c - b * sum(q_others)) / (2b), clamped at zero and rounded.
pub fn cournot_best_response(a: f64, b: f64, own_cost: f64, opponents_last: &[u32]) -> u32 {
    let others: f64 = opponents_last.iter().map(|q| f64::from(*q)).sum();
    round_half_up_nonneg((a - own_cost - b * others) / (2.0 * b))
}

/// Differentiated-Bertrand best response to the opponents' last prices:
/// (A + sum(d * p_others) + B * c) / (2B), clamped and rounded.
pub fn bertrand_differentiated_best_response(
    intercept: f64,
    own_slope: f64,
    cross_slopes: &[f64],
    own_cost: f64,
    opponents_last: &[u32],
) -> u32 {
    let cross: f64 = cross_slopes
        .iter()
        .zip(opponents_last)
        .map(|(d, p)| d * f64::from(*p))
        .sum();
    round_half_up_nonneg((intercept + cross + own_slope * own_cost) / (2.0 * own_slope))
}

/// The oracle action for one firm, rounded to a playable integer.
pub fn nash_fixed_action(
    equilibrium: Option<&EquilibriumSolution>,
    firm_index: usize,
) -> Result<u32, PolicyError> {
    let eq = equilibrium.ok_or(PolicyError::MissingEquilibrium)?;
    Ok(round_half_up_nonneg(eq.playable_action(firm_index)))
}
