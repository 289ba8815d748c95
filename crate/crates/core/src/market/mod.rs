//! Horizontal market games: Cournot quantity competition and Bertrand
//! price competition, with analytic Nash-equilibrium oracles and a round
//! history that profits can always be recomputed from.

mod bertrand;
mod cournot;
mod solve;

pub use bertrand::{
    bertrand_differentiated_clear, bertrand_differentiated_equilibrium,
    bertrand_homogeneous_clear, bertrand_homogeneous_equilibrium, bertrand_symmetric_closed_form,
};
pub use cournot::{cournot_clear, cournot_equilibrium};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{MarketModel, MarketScenario};

#[derive(Debug, Error, PartialEq)]
pub enum MarketError {
    #[error("expected {expected} actions (one per firm), got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("first-order-condition system is singular")]
    SingularSystem,
    #[error("no stable equilibrium: {detail}")]
    NoEquilibrium { detail: String },
    #[error("round already past the configured horizon")]
    EpisodeFinished,
}

/// Analytic Nash equilibrium of a configured market.
///
/// `actions` holds each firm's equilibrium decision (quantity for Cournot,
/// price for Bertrand); `quantities` the implied per-firm sales.
/// Cournot also reports the aggregate output Q* and market price P*;
/// homogeneous Bertrand reports the limit price in `actions` and the
/// playable grid price in `tick_feasible_actions`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub actions: Vec<f64>,
    pub quantities: Vec<f64>,
    pub market_price: Option<f64>,
    pub aggregate_quantity: Option<f64>,
    pub tick_feasible_actions: Option<Vec<f64>>,
}

impl EquilibriumSolution {
    /// Preferred playable action for one firm: the tick-feasible value when
    /// the oracle distinguishes it from the limit value.
    pub fn playable_action(&self, firm: usize) -> f64 {
        self.tick_feasible_actions
            .as_ref()
            .map(|t| t[firm])
            .unwrap_or(self.actions[firm])
    }
}

/// Solve the equilibrium for any market scenario.
pub fn equilibrium(scenario: &MarketScenario) -> Result<EquilibriumSolution, MarketError> {
    match &scenario.model {
        MarketModel::Cournot { a, b, costs } => cournot_equilibrium(*a, *b, costs),
        MarketModel::BertrandHomogeneous { a, b, costs, tick } => {
            bertrand_homogeneous_equilibrium(*a, *b, costs, *tick)
        }
        MarketModel::BertrandDifferentiated {
            intercepts,
            own_price_slopes,
            substitution,
            costs,
        } => {
            let sub = substitution
                .resolve(costs.len())
                .map_err(|e| MarketError::NoEquilibrium { detail: e.to_string() })?;
            bertrand_differentiated_equilibrium(intercepts, own_price_slopes, &sub, costs)
        }
    }
}

/// Outcome of clearing one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    /// 1-based round index.
    pub round: u32,
    pub actions: Vec<u32>,
    /// Market price (Cournot only).
    pub price: Option<f64>,
    /// Per-firm sales (Bertrand only).
    pub sales: Option<Vec<f64>>,
    pub profits: Vec<f64>,
    /// Sum of all firms' cumulative profits after this round.
    pub cumulative_reward: f64,
}

/// Round history of one market episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub scenario: MarketScenario,
    /// Completed rounds.
    pub round: u32,
    pub action_history: Vec<Vec<u32>>,
    /// Per-round market price (Cournot).
    pub price_history: Vec<f64>,
    /// Per-round per-firm sales (Bertrand).
    pub sales_history: Vec<Vec<f64>>,
    pub profit_history: Vec<Vec<f64>>,
    pub cumulative_profit: Vec<f64>,
}

impl MarketState {
    pub fn new(scenario: MarketScenario) -> Self {
        let n = scenario.num_firms();
        MarketState {
            scenario,
            round: 0,
            action_history: Vec::new(),
            price_history: Vec::new(),
            sales_history: Vec::new(),
            profit_history: Vec::new(),
            cumulative_profit: vec![0.0; n],
        }
    }

    pub fn num_firms(&self) -> usize {
        self.scenario.num_firms()
    }

    /// Clear one round of simultaneous actions and append it to the history.
    pub fn apply_round(&mut self, actions: &[u32]) -> Result<RoundOutcome, MarketError> {
        if self.round >= self.scenario.rounds {
            return Err(MarketError::EpisodeFinished);
        }
        let (price, sales, profits) = match &self.scenario.model {
            MarketModel::Cournot { a, b, costs } => {
                let (price, profits) = cournot_clear(*a, *b, costs, actions)?;
                (Some(price), None, profits)
            }
            MarketModel::BertrandHomogeneous { a, b, costs, .. } => {
                let (sales, profits) = bertrand_homogeneous_clear(*a, *b, costs, actions)?;
                (None, Some(sales), profits)
            }
            MarketModel::BertrandDifferentiated {
                intercepts,
                own_price_slopes,
                substitution,
                costs,
            } => {
                let sub = substitution
                    .resolve(costs.len())
                    .map_err(|e| MarketError::NoEquilibrium { detail: e.to_string() })?;
                let (sales, profits) =
                    bertrand_differentiated_clear(intercepts, own_price_slopes, &sub, costs, actions)?;
                (None, Some(sales), profits)
            }
        };
        self.round += 1;
        self.action_history.push(actions.to_vec());
        if let Some(p) = price {
            self.price_history.push(p);
        }
        if let Some(s) = &sales {
            self.sales_history.push(s.clone());
        }
        self.profit_history.push(profits.clone());
        for (acc, p) in self.cumulative_profit.iter_mut().zip(&profits) {
            *acc += p;
        }
        Ok(RoundOutcome {
            round: self.round,
            actions: actions.to_vec(),
            price,
            sales,
            profits,
            cumulative_reward: self.cumulative_profit.iter().sum(),
        })
    }

    /// Recompute every round's profits from actions and parameters; used to
    /// check that the stored history was never hand-edited.
    pub fn recompute_profits(&self) -> Result<Vec<Vec<f64>>, MarketError> {
        let mut replay = MarketState::new(self.scenario.clone());
        let mut out = Vec::with_capacity(self.action_history.len());
        for actions in &self.action_history {
            out.push(replay.apply_round(actions)?.profits);
        }
        Ok(out)
    }
}

impl MarketScenario {
    pub fn num_firms(&self) -> usize {
        match &self.model {
            MarketModel::Cournot { costs, .. } => costs.len(),
            MarketModel::BertrandHomogeneous { costs, .. } => costs.len(),
            MarketModel::BertrandDifferentiated { costs, .. } => costs.len(),
        }
    }

    /// Marginal cost of one firm.
    pub fn cost(&self, firm: usize) -> f64 {
        match &self.model {
            MarketModel::Cournot { costs, .. } => costs[firm],
            MarketModel::BertrandHomogeneous { costs, .. } => costs[firm],
            MarketModel::BertrandDifferentiated { costs, .. } => costs[firm],
        }
    }
}
