//! Observation construction: what one stage is allowed to see before
//! deciding its order, under either information regime.

use serde::{Deserialize, Serialize};

use crate::scenario::InfoMode;

use super::engine::{BeerGameState, EngineError};

/// History window lengths shown to agents, and whether the upstream
/// backlog owed to a stage is visible at all.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    pub sales_window: usize,
    pub orders_window: usize,
    pub rewards_window: usize,
    pub demand_window: usize,
    pub show_upstream_backlog: bool,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            sales_window: 3,
            orders_window: 6,
            rewards_window: 6,
            demand_window: 6,
            show_upstream_backlog: true,
        }
    }
}

/// Upstream partner state disclosed under information sharing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpstreamInfo {
    pub lead_time: u32,
    pub on_hand: u32,
    pub backlog: u32,
}

/// Everything one stage sees at decision time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub stage_index: usize,
    /// Completed periods; the upcoming decision is for round `period + 1`.
    pub period: u32,
    pub lead_time: u32,
    pub on_hand: u32,
    pub backlog_to_downstream: u32,
    /// What the immediate upstream partner owes this stage (the
    /// manufacturer reads its production queue). Hidden by config.
    pub upstream_backlog_owed_to_me: Option<u32>,
    /// Last few units shipped downstream, oldest first.
    pub recent_sales: Vec<u32>,
    /// Quantities arriving this period and the next ones, indexed by
    /// periods-ahead; length equals this stage's own lead time.
    pub arriving_deliveries: Vec<u32>,
    /// The downstream neighbor's order placed this round (orders travel
    /// with zero delay). Absent for the retailer, whose demand is only
    /// revealed when the period executes.
    pub received_order_now: Option<u32>,
    /// Recent orders received from downstream, oldest first. Empty for the
    /// retailer, which sees `demand_history` instead.
    pub received_order_history: Vec<u32>,
    /// Recent end-customer demands (retailer only).
    pub demand_history: Option<Vec<u32>>,
    /// Demand envelope from market research (retailer only).
    pub demand_range_hint: Option<(u32, u32)>,
    /// Recent signed period rewards, oldest first.
    pub reward_history: Vec<f64>,
    /// Present iff info_mode is Sharing and the stage is not the topmost.
    pub upstream_info: Option<UpstreamInfo>,
}

impl Observation {
    /// On-hand minus backlog plus everything on order.
    pub fn inventory_position(&self) -> i64 {
        i64::from(self.on_hand) - i64::from(self.backlog_to_downstream)
            + self.arriving_deliveries.iter().map(|q| i64::from(*q)).sum::<i64>()
    }
}

fn tail<T: Clone>(items: &[T], window: usize) -> Vec<T> {
    let start = items.len().saturating_sub(window);
    items[start..].to_vec()
}

/// Build the observation for one stage. `received_order_now` carries the
/// downstream neighbor's order from the current decision round, when the
/// stages upstream of it decide later in the same round.
pub fn observe(
    state: &BeerGameState,
    stage_index: usize,
    info_mode: InfoMode,
    config: &ObservationConfig,
    received_order_now: Option<u32>,
) -> Result<Observation, EngineError> {
    let n = state.num_stages();
    if stage_index >= n {
        return Err(EngineError::BadStageIndex { index: stage_index, num_stages: n });
    }
    let stage = &state.stages[stage_index];
    let lead = state.scenario.lead_time[stage_index];
    let is_retailer = stage_index == 0;
    let is_topmost = stage_index + 1 == n;

    let mut arriving = vec![0u32; lead as usize];
    for entry in &stage.inbound_pipeline {
        let ahead = (entry.arrival_period - state.period) as usize;
        debug_assert!(ahead < lead as usize, "pipeline entry beyond lead-time window");
        arriving[ahead] += entry.quantity;
    }

    let upstream_backlog = if is_topmost {
        state.raw_supply_backlog
    } else {
        state.stages[stage_index + 1].backlog_to_downstream
    };

    let upstream_info = match (info_mode, is_topmost) {
        (InfoMode::Sharing, false) => {
            let up = &state.stages[stage_index + 1];
            Some(UpstreamInfo {
                lead_time: state.scenario.lead_time[stage_index + 1],
                on_hand: up.on_hand,
                backlog: up.backlog_to_downstream,
            })
        }
        _ => None,
    };

    Ok(Observation {
        stage_index,
        period: state.period,
        lead_time: lead,
        on_hand: stage.on_hand,
        backlog_to_downstream: stage.backlog_to_downstream,
        upstream_backlog_owed_to_me: config.show_upstream_backlog.then_some(upstream_backlog),
        recent_sales: tail(&stage.sales_history, config.sales_window),
        arriving_deliveries: arriving,
        received_order_now: if is_retailer { None } else { received_order_now },
        received_order_history: if is_retailer {
            Vec::new()
        } else {
            tail(&stage.received_order_history, config.orders_window)
        },
        demand_history: is_retailer.then(|| tail(&state.demand_history, config.demand_window)),
        demand_range_hint: is_retailer.then(|| state.scenario.demand.range_hint()),
        reward_history: tail(&stage.reward_history, config.rewards_window),
        upstream_info,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beer::BeerGameState;
    use crate::scenario::tests_support::beer_421;

    fn played_state(info_mode: InfoMode) -> BeerGameState {
        let mut scenario = beer_421();
        scenario.info_mode = info_mode;
        let mut state = BeerGameState::init(scenario).unwrap();
        for _ in 0..3 {
            state.step(&[4, 5, 6, 7]).unwrap();
        }
        state
    }

    #[test]
    fn sharing_exposes_upstream_partner() {
        let state = played_state(InfoMode::Sharing);
        let obs = observe(&state, 0, InfoMode::Sharing, &ObservationConfig::default(), None)
            .unwrap();
        let info = obs.upstream_info.unwrap();
        assert_eq!(info.lead_time, 2);
        assert_eq!(info.on_hand, state.stages[1].on_hand);
        assert_eq!(info.backlog, state.stages[1].backlog_to_downstream);
    }

    #[test]
    fn isolated_hides_upstream_partner() {
        let state = played_state(InfoMode::Isolated);
        let obs = observe(&state, 0, InfoMode::Isolated, &ObservationConfig::default(), None)
            .unwrap();
        assert!(obs.upstream_info.is_none());
    }

    #[test]
    fn manufacturer_has_no_upstream_info_in_either_mode() {
        let state = played_state(InfoMode::Sharing);
        for mode in [InfoMode::Isolated, InfoMode::Sharing] {
            let obs = observe(&state, 3, mode, &ObservationConfig::default(), None).unwrap();
            assert!(obs.upstream_info.is_none());
            // but it still reads its production queue as upstream backlog
            assert_eq!(obs.upstream_backlog_owed_to_me, Some(state.raw_supply_backlog));
        }
    }

    #[test]
    fn retailer_fields_absent_for_other_stages() {
        let state = played_state(InfoMode::Isolated);
        let retailer =
            observe(&state, 0, InfoMode::Isolated, &ObservationConfig::default(), None).unwrap();
        assert!(retailer.demand_history.is_some());
        assert_eq!(retailer.demand_range_hint, Some((0, 8)));
        assert!(retailer.received_order_now.is_none());
        assert!(retailer.received_order_history.is_empty());

        let wholesaler =
            observe(&state, 1, InfoMode::Isolated, &ObservationConfig::default(), Some(9))
                .unwrap();
        assert!(wholesaler.demand_history.is_none());
        assert!(wholesaler.demand_range_hint.is_none());
        assert_eq!(wholesaler.received_order_now, Some(9));
        assert_eq!(wholesaler.received_order_history.len(), 3);
    }

    #[test]
    fn arriving_deliveries_span_own_lead_time() {
        let state = played_state(InfoMode::Isolated);
        let obs = observe(&state, 2, InfoMode::Isolated, &ObservationConfig::default(), None)
            .unwrap();
        assert_eq!(obs.arriving_deliveries.len(), 2);
        let manufacturer =
            observe(&state, 3, InfoMode::Isolated, &ObservationConfig::default(), None).unwrap();
        assert_eq!(manufacturer.arriving_deliveries.len(), 3);
        let pipeline_total: u32 = state.stages[3].inbound_pipeline.iter().map(|e| e.quantity).sum();
        let visible_total: u32 = manufacturer.arriving_deliveries.iter().sum();
        assert_eq!(pipeline_total, visible_total);
    }

    #[test]
    fn windows_truncate_histories() {
        let mut scenario = beer_421();
        scenario.horizon = 20;
        let mut state = BeerGameState::init(scenario).unwrap();
        for _ in 0..10 {
            state.step(&[1, 1, 1, 1]).unwrap();
        }
        let obs = observe(&state, 1, InfoMode::Isolated, &ObservationConfig::default(), None)
            .unwrap();
        assert_eq!(obs.recent_sales.len(), 3);
        assert_eq!(obs.received_order_history.len(), 6);
        assert_eq!(obs.reward_history.len(), 6);
        // oldest-first ordering
        assert_eq!(obs.received_order_history, state.stages[1].received_order_history[4..].to_vec());
    }

    #[test]
    fn upstream_backlog_hidden_by_config() {
        let state = played_state(InfoMode::Isolated);
        let cfg = ObservationConfig { show_upstream_backlog: false, ..Default::default() };
        let obs = observe(&state, 0, InfoMode::Isolated, &cfg, None).unwrap();
        assert!(obs.upstream_backlog_owed_to_me.is_none());
    }

    #[test]
    fn bad_stage_index_rejected() {
        let state = played_state(InfoMode::Isolated);
        assert!(matches!(
            observe(&state, 9, InfoMode::Isolated, &ObservationConfig::default(), None),
            Err(EngineError::BadStageIndex { index: 9, num_stages: 4 })
        ));
    }
}
