//! Uniform agent abstraction over scripted policies and LLM players:
//! prompt rendering, bracketed-integer action parsing with a retry loop,
//! and transcript capture.

mod parse;
mod prompts;
mod transcript;

pub use parse::{parse_action, ParseActionError};
pub use prompts::{
    render_beer_prompts, render_market_prompts, render_template, MarketHistoryView, PromptBundle,
    PromptError,
};
pub use transcript::{Transcript, TranscriptSink};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beer::Observation;
use crate::llm::{ChatClient, ChatMessage, ClientError};
use crate::market::{EquilibriumSolution, MarketState};
use crate::policies::{
    base_stock_order, bertrand_differentiated_best_response, cournot_best_response,
    nash_fixed_action, tracking_demand_order, PolicyConfig, PolicyError,
};
use crate::scenario::{BeerScenario, MarketModel, MarketScenario, RiskPreference};

/// How one agent decides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentKind {
    Scripted {
        policy: PolicyConfig,
    },
    Llm {
        model_id: String,
        #[serde(default)]
        temperature: f64,
        #[serde(default)]
        risk: Option<RiskPreference>,
        #[serde(default = "default_max_retries")]
        max_retries: u32,
    },
}

fn default_max_retries() -> u32 {
    3
}

/// One roster entry of a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub kind: AgentKind,
    /// Inclusive clamp applied to every action this agent emits.
    #[serde(default)]
    pub action_bounds: Option<(u32, u32)>,
}

impl AgentSpec {
    pub fn is_llm(&self) -> bool {
        matches!(self.kind, AgentKind::Llm { .. })
    }

    pub fn risk(&self) -> Option<RiskPreference> {
        match &self.kind {
            AgentKind::Llm { risk, .. } => *risk,
            AgentKind::Scripted { .. } => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("client failure for agent {agent_id}: {source}")]
    Client {
        agent_id: String,
        source: ClientError,
        /// Whatever exchange happened before the failure.
        transcript: Box<Transcript>,
    },
}

/// Game-side inputs a scripted policy needs.
pub enum DecisionContext<'a> {
    Beer {
        scenario: &'a BeerScenario,
        obs: &'a Observation,
        rng: &'a mut ChaCha8Rng,
    },
    Market {
        scenario: &'a MarketScenario,
        state: &'a MarketState,
        firm_index: usize,
        equilibrium: Option<&'a EquilibriumSolution>,
        rng: &'a mut ChaCha8Rng,
    },
}

impl DecisionContext<'_> {
    fn round(&self) -> u32 {
        match self {
            DecisionContext::Beer { obs, .. } => obs.period + 1,
            DecisionContext::Market { state, .. } => state.round + 1,
        }
    }
}

const CORRECTIVE_INSTRUCTION: &str = "Your previous reply did not contain a valid decision. Please reply with your decision as a single non-negative integer in square brackets (e.g. [5]).";

fn clamp_to_bounds(action: u32, bounds: Option<(u32, u32)>) -> u32 {
    match bounds {
        Some((lo, hi)) => action.clamp(lo, hi),
        None => action,
    }
}

fn evaluate_policy(policy: &PolicyConfig, ctx: &mut DecisionContext) -> Result<u32, PolicyError> {
    use rand::Rng;
    match ctx {
        DecisionContext::Beer { scenario, obs, rng } => match policy {
            PolicyConfig::BaseStock { target } => {
                let target = target.unwrap_or(scenario.capacity[obs.stage_index]);
                Ok(base_stock_order(obs, target))
            }
            PolicyConfig::TrackingDemand { l_max } => {
                Ok(tracking_demand_order(obs, obs.lead_time, *l_max))
            }
            PolicyConfig::RandomUniform { lo, hi } => Ok(rng.random_range(*lo..=*hi)),
            PolicyConfig::NashFixed | PolicyConfig::MyopicBestResponse => {
                Err(PolicyError::WrongGame {
                    policy: format!("{policy:?}"),
                    game: "beer".to_string(),
                })
            }
        },
        DecisionContext::Market { scenario, state, firm_index, equilibrium, rng } => match policy {
            PolicyConfig::NashFixed => nash_fixed_action(*equilibrium, *firm_index),
            PolicyConfig::MyopicBestResponse => {
                let last_actions = state.action_history.last();
                match &scenario.model {
                    MarketModel::Cournot { a, b, costs } => {
                        let opponents: Vec<u32> = match last_actions {
                            Some(actions) => actions
                                .iter()
                                .enumerate()
                                .filter(|(j, _)| j != firm_index)
                                .map(|(_, q)| *q)
                                .collect(),
                            None => Vec::new(),
                        };
                        Ok(cournot_best_response(*a, *b, costs[*firm_index], &opponents))
                    }
                    MarketModel::BertrandDifferentiated {
                        intercepts,
                        own_price_slopes,
                        substitution,
                        costs,
                    } => {
                        let n = costs.len();
                        let sub = substitution.resolve(n).map_err(|_| PolicyError::WrongGame {
                            policy: "MyopicBestResponse".to_string(),
                            game: "unresolvable substitution".to_string(),
                        })?;
                        let mut cross = Vec::new();
                        let mut opponents = Vec::new();
                        for j in 0..n {
                            if j != *firm_index {
                                cross.push(sub[*firm_index][j]);
                                opponents.push(last_actions.map(|a| a[j]).unwrap_or(0));
                            }
                        }
                        Ok(bertrand_differentiated_best_response(
                            intercepts[*firm_index],
                            own_price_slopes[*firm_index],
                            &cross,
                            costs[*firm_index],
                            &opponents,
                        ))
                    }
                    MarketModel::BertrandHomogeneous { .. } => Err(PolicyError::WrongGame {
                        policy: "MyopicBestResponse".to_string(),
                        game: "bertrand_homogeneous".to_string(),
                    }),
                }
            }
            PolicyConfig::RandomUniform { lo, hi } => Ok(rng.random_range(*lo..=*hi)),
            PolicyConfig::BaseStock { .. } | PolicyConfig::TrackingDemand { .. } => {
                Err(PolicyError::WrongGame {
                    policy: format!("{policy:?}"),
                    game: "market".to_string(),
                })
            }
        },
    }
}

/// Produce one action. Scripted agents bypass the prompts and evaluate
/// their policy; LLM agents submit the rendered messages, parse the reply,
/// and retry with a corrective instruction on parse failures. After
/// exhausting retries the agent falls back to its previous action (or 0)
/// and the transcript is marked accordingly.
pub fn decide(
    agent: &AgentSpec,
    prompts: &PromptBundle,
    ctx: &mut DecisionContext,
    client: &mut dyn ChatClient,
    last_action: Option<u32>,
) -> Result<(u32, Transcript), AgentError> {
    let round = ctx.round();
    match &agent.kind {
        AgentKind::Scripted { policy } => {
            let action = clamp_to_bounds(evaluate_policy(policy, ctx)?, agent.action_bounds);
            Ok((action, Transcript::scripted(&agent.id, round, action)))
        }
        AgentKind::Llm { model_id, temperature, max_retries, .. } => {
            let mut messages = vec![
                ChatMessage::system(&prompts.system_message),
                ChatMessage::user(&prompts.process_message),
            ];
            let mut retry_count = 0u32;
            loop {
                let completion = match client.complete(model_id, &messages, *temperature) {
                    Ok(c) => c,
                    Err(source) => {
                        let transcript = Transcript {
                            agent_id: agent.id.clone(),
                            round,
                            messages: messages.clone(),
                            raw_response: String::new(),
                            parsed_action: None,
                            retry_count,
                            fallback: false,
                        };
                        return Err(AgentError::Client {
                            agent_id: agent.id.clone(),
                            source,
                            transcript: Box::new(transcript),
                        });
                    }
                };
                messages.push(ChatMessage::assistant(&completion.text));
                match parse_action(&completion.text) {
                    Ok(action) => {
                        let action = clamp_to_bounds(action, agent.action_bounds);
                        let transcript = Transcript {
                            agent_id: agent.id.clone(),
                            round,
                            messages,
                            raw_response: completion.text,
                            parsed_action: Some(action),
                            retry_count,
                            fallback: false,
                        };
                        return Ok((action, transcript));
                    }
                    Err(_) if retry_count < *max_retries => {
                        messages.push(ChatMessage::user(CORRECTIVE_INSTRUCTION));
                        retry_count += 1;
                    }
                    Err(_) => {
                        let action = clamp_to_bounds(
                            last_action.unwrap_or(0),
                            agent.action_bounds,
                        );
                        let transcript = Transcript {
                            agent_id: agent.id.clone(),
                            round,
                            messages,
                            raw_response: completion.text,
                            parsed_action: None,
                            retry_count,
                            fallback: true,
                        };
                        return Ok((action, transcript));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockClient, MockSpec};
    use crate::rng;
    use crate::scenario::tests_support::beer_421;
    use std::collections::BTreeMap;

    fn empty_bundle() -> PromptBundle {
        PromptBundle {
            system_message: "sys".to_string(),
            process_message: "proc".to_string(),
            placeholders_resolved: BTreeMap::new(),
        }
    }

    fn base_stock_agent() -> AgentSpec {
        AgentSpec {
            id: "retailer".to_string(),
            kind: AgentKind::Scripted { policy: PolicyConfig::BaseStock { target: None } },
            action_bounds: None,
        }
    }

    fn llm_agent(max_retries: u32) -> AgentSpec {
        AgentSpec {
            id: "retailer".to_string(),
            kind: AgentKind::Llm {
                model_id: "test-model".to_string(),
                temperature: 0.0,
                risk: Some(RiskPreference::Averse),
                max_retries,
            },
            action_bounds: None,
        }
    }

    fn beer_ctx<'a>(
        scenario: &'a BeerScenario,
        obs: &'a Observation,
        rng: &'a mut ChaCha8Rng,
    ) -> DecisionContext<'a> {
        DecisionContext::Beer { scenario, obs, rng }
    }

    fn retailer_obs() -> Observation {
        Observation {
            stage_index: 0,
            period: 0,
            lead_time: 2,
            on_hand: 12,
            backlog_to_downstream: 0,
            upstream_backlog_owed_to_me: Some(0),
            recent_sales: vec![],
            arriving_deliveries: vec![0, 0],
            received_order_now: None,
            received_order_history: vec![],
            demand_history: Some(vec![]),
            demand_range_hint: Some((0, 8)),
            reward_history: vec![],
            upstream_info: None,
        }
    }

    #[test]
    fn scripted_agent_bypasses_prompts() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let mut client = MockClient::new(MockSpec::Replies { replies: vec![] }, 0);
        let (action, transcript) =
            decide(&base_stock_agent(), &empty_bundle(), &mut ctx, &mut client, None).unwrap();
        // base stock up to capacity 20 from position 12
        assert_eq!(action, 8);
        assert!(transcript.messages.is_empty());
        assert_eq!(client.calls(), 0);
    }

    #[test]
    fn llm_happy_path() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let mut client =
            MockClient::new(MockSpec::Replies { replies: vec!["sounds good [26]".to_string()] }, 0);
        let (action, transcript) =
            decide(&llm_agent(3), &empty_bundle(), &mut ctx, &mut client, None).unwrap();
        assert_eq!(action, 26);
        assert_eq!(transcript.retry_count, 0);
        assert_eq!(transcript.parsed_action, Some(26));
        assert!(!transcript.fallback);
        // system + user + assistant
        assert_eq!(transcript.messages.len(), 3);
    }

    #[test]
    fn llm_retries_then_succeeds() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let replies = vec![
            "hmm".to_string(),
            "still thinking".to_string(),
            "[7]".to_string(),
        ];
        let mut client = MockClient::new(MockSpec::Replies { replies }, 0);
        let (action, transcript) =
            decide(&llm_agent(3), &empty_bundle(), &mut ctx, &mut client, None).unwrap();
        assert_eq!(action, 7);
        assert_eq!(transcript.retry_count, 2);
        assert_eq!(transcript.parsed_action, Some(7));
        // corrective user messages appear in the log
        let corrective = transcript
            .messages
            .iter()
            .filter(|m| m.content == CORRECTIVE_INSTRUCTION)
            .count();
        assert_eq!(corrective, 2);
    }

    #[test]
    fn llm_fallback_repeats_last_action() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let replies = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let mut client = MockClient::new(MockSpec::Replies { replies }, 0);
        let (action, transcript) =
            decide(&llm_agent(2), &empty_bundle(), &mut ctx, &mut client, Some(9)).unwrap();
        assert_eq!(action, 9);
        assert!(transcript.fallback);
        assert_eq!(transcript.parsed_action, None);
        assert_eq!(transcript.retry_count, 2);
    }

    #[test]
    fn llm_fallback_without_history_is_zero() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let mut client =
            MockClient::new(MockSpec::Replies { replies: vec!["nope".to_string()] }, 0);
        let (action, transcript) =
            decide(&llm_agent(0), &empty_bundle(), &mut ctx, &mut client, None).unwrap();
        assert_eq!(action, 0);
        assert!(transcript.fallback);
    }

    #[test]
    fn bounds_clamp_parsed_actions() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let mut agent = llm_agent(0);
        agent.action_bounds = Some((0, 50));
        let mut client =
            MockClient::new(MockSpec::Replies { replies: vec!["[1000000]".to_string()] }, 0);
        let (action, _) = decide(&agent, &empty_bundle(), &mut ctx, &mut client, None).unwrap();
        assert_eq!(action, 50);
    }

    #[test]
    fn market_policy_in_beer_game_is_rejected() {
        let scenario = beer_421();
        let obs = retailer_obs();
        let mut stream = rng::stream(1, "policy");
        let mut ctx = beer_ctx(&scenario, &obs, &mut stream);
        let agent = AgentSpec {
            id: "x".to_string(),
            kind: AgentKind::Scripted { policy: PolicyConfig::NashFixed },
            action_bounds: None,
        };
        let mut client = MockClient::new(MockSpec::Replies { replies: vec![] }, 0);
        let out = decide(&agent, &empty_bundle(), &mut ctx, &mut client, None);
        assert!(matches!(out, Err(AgentError::Policy(PolicyError::WrongGame { .. }))));
    }

    #[test]
    fn agent_spec_roundtrips_through_json() {
        let agent = AgentSpec {
            id: "firm_1".to_string(),
            kind: AgentKind::Llm {
                model_id: "deepseek-r1".to_string(),
                temperature: 0.0,
                risk: Some(RiskPreference::Appetite),
                max_retries: 3,
            },
            action_bounds: Some((0, 1000)),
        };
        let json = serde_json::to_string(&agent).unwrap();
        let back: AgentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(agent, back);
    }
}
