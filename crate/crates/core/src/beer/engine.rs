//! Per-period event sequence of the beer game.
//!
//! Each `step` executes four phases for every stage:
//! 1. pipeline arrivals due this period are added to on-hand stock;
//! 2. the retailer receives the period's demand and every other stage
//!    receives its downstream neighbor's order (orders travel upstream
//!    with zero delay; only goods take lead time);
//! 3. fulfillment: each stage ships min(on-hand, backlog + received order,
//!    capacity), oldest obligations first; shipments enter the downstream
//!    stage's pipeline and arrive after the receiver's lead time; what
//!    cannot be shipped accrues as backlog;
//! 4. each stage places its own order. The manufacturer's order joins its
//!    production queue; the queue releases at most `capacity` units per
//!    period into the manufacturer's own pipeline.
//!
//! Per-stage period reward is -(h * max(I, 0) - s * min(I, 0)) on the
//! post-fulfillment net inventory I = on-hand - backlog; the period chain
//! cost is the sum of the unsigned costs.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::{sample_demand, DemandError};
use crate::rng;
use crate::scenario::{validate_beer, BeerScenario, ValidationError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    InvalidScenario(#[from] ValidationError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("expected {expected} orders (one per stage), got {got}")]
    WrongOrderCount { expected: usize, got: usize },
    #[error("episode already finished (period {period} of {horizon})")]
    EpisodeFinished { period: u32, horizon: u32 },
    #[error("stage index {index} out of range for {num_stages} stages")]
    BadStageIndex { index: usize, num_stages: usize },
}

/// A quantity en route, available at `arrival_period`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineEntry {
    pub arrival_period: u32,
    pub quantity: u32,
}

/// Local state of one chain stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageState {
    pub on_hand: u32,
    pub backlog_to_downstream: u32,
    pub inbound_pipeline: Vec<PipelineEntry>,
    /// Orders this stage placed upstream, one per period.
    pub order_history: Vec<u32>,
    /// Units shipped downstream, one per period.
    pub sales_history: Vec<u32>,
    /// Orders received from downstream (retailer: demand), one per period.
    pub received_order_history: Vec<u32>,
    /// Signed period rewards (negative costs), one per period.
    pub reward_history: Vec<f64>,
    /// Post-fulfillment net inventory, one per period.
    pub net_inventory_history: Vec<i64>,
}

impl StageState {
    fn new(initial_inventory: u32) -> Self {
        StageState {
            on_hand: initial_inventory,
            backlog_to_downstream: 0,
            inbound_pipeline: Vec::new(),
            order_history: Vec::new(),
            sales_history: Vec::new(),
            received_order_history: Vec::new(),
            reward_history: Vec::new(),
            net_inventory_history: Vec::new(),
        }
    }

    /// Net inventory I = on-hand - backlog.
    pub fn net_inventory(&self) -> i64 {
        i64::from(self.on_hand) - i64::from(self.backlog_to_downstream)
    }

    /// Units currently in the inbound pipeline.
    pub fn on_order(&self) -> u64 {
        self.inbound_pipeline.iter().map(|e| u64::from(e.quantity)).sum()
    }
}

/// What one `step` did, for logging and invariant checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// The period that was just processed (0-based).
    pub period: u32,
    pub demand: u32,
    /// Orders placed this period, one per stage.
    pub orders: Vec<u32>,
    /// Pipeline arrivals received this period, one per stage.
    pub arrivals: Vec<u32>,
    /// Units shipped downstream this period, one per stage.
    pub shipments: Vec<u32>,
    /// Units the manufacturer released into production this period.
    pub production_release: u32,
    /// Signed per-stage rewards.
    pub rewards: Vec<f64>,
    /// Unsigned holding + backlog cost of this period across stages.
    pub chain_cost: f64,
}

/// Full game state; a plain value that can be cloned and sent across
/// threads. Demand is drawn from a stream derived from the scenario seed,
/// so identical (scenario, order sequence) pairs yield identical
/// trajectories.
#[derive(Clone, Debug)]
pub struct BeerGameState {
    pub scenario: BeerScenario,
    /// Completed periods, in [0, horizon].
    pub period: u32,
    pub stages: Vec<StageState>,
    pub demand_history: Vec<u32>,
    /// Manufacturer orders accepted but not yet released into production.
    pub raw_supply_backlog: u32,
    pub cumulative_chain_cost: f64,
    /// Per-period chain cost, one per completed period.
    pub period_chain_costs: Vec<f64>,
    demand_rng: ChaCha8Rng,
}

impl BeerGameState {
    /// Start a fresh episode: period 0, each stage holding its initial
    /// inventory with an empty pipeline and empty histories.
    pub fn init(scenario: BeerScenario) -> Result<Self, EngineError> {
        validate_beer(&scenario)?;
        let stages = scenario
            .initial_inventory
            .iter()
            .map(|inv| StageState::new(*inv))
            .collect();
        let demand_rng = rng::stream(scenario.seed, "demand");
        Ok(BeerGameState {
            scenario,
            period: 0,
            stages,
            demand_history: Vec::new(),
            raw_supply_backlog: 0,
            cumulative_chain_cost: 0.0,
            period_chain_costs: Vec::new(),
            demand_rng,
        })
    }

    pub fn num_stages(&self) -> usize {
        self.scenario.num_stages
    }

    pub fn finished(&self) -> bool {
        self.period >= self.scenario.horizon
    }

    /// Execute one period with the given per-stage orders.
    pub fn step(&mut self, orders: &[u32]) -> Result<StepOutcome, EngineError> {
        let n = self.num_stages();
        if self.finished() {
            return Err(EngineError::EpisodeFinished {
                period: self.period,
                horizon: self.scenario.horizon,
            });
        }
        if orders.len() != n {
            return Err(EngineError::WrongOrderCount { expected: n, got: orders.len() });
        }
        let t = self.period;

        // Phase 1: arrivals
        let mut arrivals = vec![0u32; n];
        for (i, stage) in self.stages.iter_mut().enumerate() {
            let mut arrived = 0u32;
            stage.inbound_pipeline.retain(|entry| {
                debug_assert!(entry.arrival_period >= t);
                if entry.arrival_period == t {
                    arrived += entry.quantity;
                    false
                } else {
                    true
                }
            });
            stage.on_hand += arrived;
            arrivals[i] = arrived;
        }

        // Phase 2: demand and order receipt (zero-delay order transmission)
        let demand = sample_demand(&self.scenario.demand, t, &mut self.demand_rng)?;
        let mut received = Vec::with_capacity(n);
        received.push(demand);
        received.extend_from_slice(&orders[..n - 1]);

        // Phase 3: fulfillment, backlog before new orders
        let mut shipments = vec![0u32; n];
        for i in 0..n {
            let stage = &mut self.stages[i];
            let owed = u64::from(stage.backlog_to_downstream) + u64::from(received[i]);
            let ship = owed
                .min(u64::from(stage.on_hand))
                .min(u64::from(self.scenario.capacity[i])) as u32;
            stage.on_hand -= ship;
            stage.backlog_to_downstream = (owed - u64::from(ship)) as u32;
            stage.sales_history.push(ship);
            stage.received_order_history.push(received[i]);
            shipments[i] = ship;
            if i > 0 && ship > 0 {
                let lead = self.scenario.lead_time[i - 1];
                self.stages[i - 1].inbound_pipeline.push(PipelineEntry {
                    arrival_period: t + lead,
                    quantity: ship,
                });
            }
            // stage 0 ships to end customers; units leave the system
        }

        // Phase 4: orders placed; manufacturer production release
        for (i, stage) in self.stages.iter_mut().enumerate() {
            stage.order_history.push(orders[i]);
        }
        let top = n - 1;
        let release_pool = u64::from(self.raw_supply_backlog) + u64::from(orders[top]);
        let release = release_pool.min(u64::from(self.scenario.capacity[top])) as u32;
        self.raw_supply_backlog = (release_pool - u64::from(release)) as u32;
        if release > 0 {
            let lead = self.scenario.lead_time[top];
            self.stages[top].inbound_pipeline.push(PipelineEntry {
                arrival_period: t + lead,
                quantity: release,
            });
        }

        // Rewards on post-fulfillment net inventory
        let mut rewards = Vec::with_capacity(n);
        let mut chain_cost = 0.0;
        for (i, stage) in self.stages.iter_mut().enumerate() {
            let net = stage.net_inventory();
            stage.net_inventory_history.push(net);
            let cost = period_stage_cost(
                net,
                self.scenario.holding_cost[i],
                self.scenario.backlog_cost[i],
            );
            stage.reward_history.push(-cost);
            rewards.push(-cost);
            chain_cost += cost;
        }
        self.cumulative_chain_cost += chain_cost;
        self.period_chain_costs.push(chain_cost);
        self.demand_history.push(demand);
        self.period = t + 1;

        Ok(StepOutcome {
            period: t,
            demand,
            orders: orders.to_vec(),
            arrivals,
            shipments,
            production_release: release,
            rewards,
            chain_cost,
        })
    }

    /// Recompute the cumulative chain cost C(T) from the recorded net
    /// inventories. Accumulates in the same per-period, per-stage order as
    /// `step`, so it matches the incremental accumulator bit for bit.
    pub fn chain_cost(&self) -> f64 {
        let periods = self.demand_history.len();
        let mut total = 0.0;
        for t in 0..periods {
            let mut period_cost = 0.0;
            for (i, stage) in self.stages.iter().enumerate() {
                period_cost += period_stage_cost(
                    stage.net_inventory_history[t],
                    self.scenario.holding_cost[i],
                    self.scenario.backlog_cost[i],
                );
            }
            total += period_cost;
        }
        total
    }
}

fn period_stage_cost(net: i64, holding: f64, backlog: f64) -> f64 {
    holding * net.max(0) as f64 - backlog * net.min(0) as f64
}
