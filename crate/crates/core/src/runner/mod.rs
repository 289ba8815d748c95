//! Experiment orchestration: load a scenario file, wire agents to the
//! right engine, execute seeded episodes (optionally repeated and in
//! parallel), persist records and transcripts, and verify that recorded
//! episodes replay exactly.

mod record;
mod report;

pub use record::{
    sha256_hex, BeerPeriodRecord, EpisodeBody, EpisodeRecord, EpisodeStatus, Manifest,
    MarketRoundRecord,
};
pub use report::{
    emit_plot_data, verify_run, write_convergence_csv, write_metrics_csv, MetricsOptions,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{
    decide, render_beer_prompts, render_market_prompts, AgentError, AgentKind, AgentSpec,
    DecisionContext, MarketHistoryView, TranscriptSink,
};
use crate::beer::{observe, BeerGameState, EngineError, ObservationConfig};
use crate::llm::{ChatClient, ClientConfig, ClientError, HttpChatClient, MockClient, MockSpec};
use crate::market::{equilibrium, EquilibriumSolution, MarketError, MarketState};
use crate::policies::PolicyConfig;
use crate::rng;
use crate::scenario::{
    validate_beer, validate_market, BeerScenario, MarketModel, MarketScenario, RiskPreference,
    ValidationError, Violation,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("agent failure: {0}")]
    Agent(String),
    #[error("not a run directory: {0}")]
    BadRunDirectory(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Full declarative description of one experiment: game, roster, and
/// observation windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub game: GameConfig,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub observation: ObservationConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GameConfig {
    Beer(BeerScenario),
    Market(MarketScenario),
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Game-level invariants plus roster arity and policy/game fit.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut violations: Vec<Violation> = Vec::new();
        let expected_agents = match &self.game {
            GameConfig::Beer(s) => {
                if let Err(e) = validate_beer(s) {
                    violations.extend(e.violations);
                }
                s.num_stages
            }
            GameConfig::Market(s) => {
                if let Err(e) = validate_market(s) {
                    violations.extend(e.violations);
                }
                s.num_firms()
            }
        };
        if self.agents.len() != expected_agents {
            violations.push(Violation {
                path: "agents".to_string(),
                message: format!(
                    "expected {} agents (one per stage/firm), got {}",
                    expected_agents,
                    self.agents.len()
                ),
            });
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.id.is_empty() {
                violations.push(Violation {
                    path: format!("agents[{i}].id"),
                    message: "must not be empty".to_string(),
                });
            }
            if let Some((lo, hi)) = agent.action_bounds {
                if lo > hi {
                    violations.push(Violation {
                        path: format!("agents[{i}].action_bounds"),
                        message: format!("lo {lo} must be <= hi {hi}"),
                    });
                }
            }
            if let AgentKind::Scripted { policy } = &agent.kind {
                let ok = match (&self.game, policy) {
                    (GameConfig::Beer(_), PolicyConfig::BaseStock { .. })
                    | (GameConfig::Beer(_), PolicyConfig::TrackingDemand { .. })
                    | (GameConfig::Market(_), PolicyConfig::NashFixed)
                    | (_, PolicyConfig::RandomUniform { .. }) => true,
                    (GameConfig::Market(s), PolicyConfig::MyopicBestResponse) => {
                        !matches!(s.model, MarketModel::BertrandHomogeneous { .. })
                    }
                    _ => false,
                };
                if !ok {
                    violations.push(Violation {
                        path: format!("agents[{i}].kind"),
                        message: format!("policy {policy:?} does not apply to this game"),
                    });
                }
                if let PolicyConfig::TrackingDemand { l_max } = policy {
                    if *l_max < 1 {
                        violations.push(Violation {
                            path: format!("agents[{i}].kind"),
                            message: "tracking_demand l_max must be >= 1".to_string(),
                        });
                    }
                }
                if let PolicyConfig::RandomUniform { lo, hi } = policy {
                    if lo > hi {
                        violations.push(Violation {
                            path: format!("agents[{i}].kind"),
                            message: format!("random_uniform lo {lo} must be <= hi {hi}"),
                        });
                    }
                }
            }
        }
        let ids: std::collections::BTreeSet<&str> =
            self.agents.iter().map(|a| a.id.as_str()).collect();
        if ids.len() != self.agents.len() {
            violations.push(Violation {
                path: "agents".to_string(),
                message: "agent ids must be unique".to_string(),
            });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn canonical_json(&self) -> Result<String, RunError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn sha256(&self) -> Result<String, RunError> {
        Ok(sha256_hex(self.canonical_json()?.as_bytes()))
    }
}

/// Episode seeds: a base (episode k uses base + k) or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    Base { base: u64 },
    List { seeds: Vec<u64> },
}

impl SeedSpec {
    fn resolve(&self, repetitions: u32) -> Vec<u64> {
        match self {
            SeedSpec::Base { base } => (0..repetitions).map(|k| base + u64::from(k)).collect(),
            SeedSpec::List { seeds } => seeds.iter().take(repetitions as usize).cloned().collect(),
        }
    }
}

/// Which chat client a run uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientSelector {
    Mock { spec: MockSpec },
    Http { config: ClientConfig },
}

impl ClientSelector {
    fn build(&self, episode_seed: u64) -> Result<Box<dyn ChatClient + Send>, RunError> {
        match self {
            ClientSelector::Mock { spec } => {
                Ok(Box::new(MockClient::new(spec.clone(), episode_seed)))
            }
            ClientSelector::Http { config } => {
                Ok(Box::new(HttpChatClient::new(config.clone())?))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub repetitions: u32,
    /// None uses the scenario's own seed as the base.
    pub seeds: Option<SeedSpec>,
    pub out_dir: PathBuf,
    pub client: ClientSelector,
    pub parallelism: usize,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub episodes: Vec<EpisodeStatus>,
}

impl RunSummary {
    pub fn flagged_count(&self) -> usize {
        self.episodes.iter().filter(|e| e.flagged).count()
    }
}

/// Execute a full run: every repetition instantiates the engine and the
/// agents, loops rounds or periods, and persists its episode record and
/// per-agent transcripts under the output directory. A hard agent/client
/// failure aborts that episode with a partial flagged record; other
/// repetitions continue.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let scenario = Scenario::from_path(&config.scenario_path)?;
    let scenario_hash = scenario.sha256()?;
    let base_seed = match &scenario.game {
        GameConfig::Beer(s) => s.seed,
        GameConfig::Market(s) => s.seed,
    };
    let seeds = config
        .seeds
        .clone()
        .unwrap_or(SeedSpec::Base { base: base_seed })
        .resolve(config.repetitions);

    std::fs::create_dir_all(&config.out_dir)?;
    std::fs::write(
        config.out_dir.join("scenario.json"),
        serde_json::to_string_pretty(&scenario)? + "\n",
    )?;

    let jobs: Vec<(u32, u64)> = seeds
        .iter()
        .enumerate()
        .map(|(k, seed)| (k as u32, *seed))
        .collect();
    let parallelism = config.parallelism.max(1);
    let mut episodes: Vec<EpisodeStatus> = Vec::with_capacity(jobs.len());

    for chunk in jobs.chunks(parallelism) {
        let results: Vec<Result<EpisodeStatus, RunError>> = if parallelism == 1 {
            chunk
                .iter()
                .map(|(k, seed)| run_episode(&scenario, &scenario_hash, *k, *seed, config))
                .collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|(k, seed)| {
                        let scenario = &scenario;
                        let hash = &scenario_hash;
                        scope.spawn(move || run_episode(scenario, hash, *k, *seed, config))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("episode thread panicked")).collect()
            })
        };
        for result in results {
            episodes.push(result?);
        }
    }

    let manifest = Manifest {
        name: scenario.name.clone(),
        scenario_sha256: scenario_hash,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        repetitions: config.repetitions,
        seeds,
        client: config.client.clone(),
        episodes: episodes.clone(),
    };
    std::fs::write(
        config.out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;

    Ok(RunSummary { run_dir: config.out_dir.clone(), episodes })
}

fn run_episode(
    scenario: &Scenario,
    scenario_hash: &str,
    episode: u32,
    seed: u64,
    config: &RunConfig,
) -> Result<EpisodeStatus, RunError> {
    let mut client = config.client.build(seed)?;
    let transcript_dir = config.out_dir.join("transcripts").join(format!("ep_{episode:04}"));
    let record = match &scenario.game {
        GameConfig::Beer(beer) => run_beer_episode(
            scenario,
            beer,
            episode,
            seed,
            scenario_hash,
            client.as_mut(),
            &transcript_dir,
        )?,
        GameConfig::Market(market) => run_market_episode(
            scenario,
            market,
            episode,
            seed,
            scenario_hash,
            client.as_mut(),
            &transcript_dir,
        )?,
    };
    let file = format!("episodes/ep_{episode:04}.jsonl");
    record.write_jsonl(&config.out_dir.join(&file))?;
    Ok(EpisodeStatus {
        episode,
        seed,
        file,
        flagged: record.flagged,
        fallback_decisions: record.fallback_decisions,
    })
}

fn agent_sinks(
    agents: &[AgentSpec],
    transcript_dir: &Path,
) -> Result<Vec<TranscriptSink>, RunError> {
    agents
        .iter()
        .map(|a| {
            TranscriptSink::create(&transcript_dir.join(format!("{}.jsonl", a.id)))
                .map_err(RunError::from)
        })
        .collect()
}

fn run_beer_episode(
    experiment: &Scenario,
    beer: &BeerScenario,
    episode: u32,
    seed: u64,
    scenario_hash: &str,
    client: &mut (dyn ChatClient + Send),
    transcript_dir: &Path,
) -> Result<EpisodeRecord, RunError> {
    let mut scenario = beer.clone();
    scenario.seed = seed;
    let n = scenario.num_stages;
    let mut state = BeerGameState::init(scenario.clone())?;
    let mut sinks = agent_sinks(&experiment.agents, transcript_dir)?;
    let mut policy_rngs: Vec<_> = experiment
        .agents
        .iter()
        .map(|a| rng::stream(seed, &format!("policy/{}", a.id)))
        .collect();
    let mut last_actions: Vec<Option<u32>> = vec![None; n];
    let mut periods: Vec<BeerPeriodRecord> = Vec::with_capacity(scenario.horizon as usize);
    let mut fallback_decisions = 0u32;
    let mut abort_reason: Option<String> = None;

    'episode: for _ in 0..scenario.horizon {
        let mut orders: Vec<u32> = Vec::with_capacity(n);
        let mut fallbacks: Vec<bool> = Vec::with_capacity(n);
        for i in 0..n {
            let received_now = if i == 0 { None } else { Some(orders[i - 1]) };
            let obs = observe(&state, i, scenario.info_mode, &experiment.observation, received_now)?;
            let agent = &experiment.agents[i];
            let risk = agent.risk().unwrap_or(RiskPreference::Neutral);
            let prompts = render_beer_prompts(&scenario, &obs, risk, scenario.info_mode)
                .map_err(|e| RunError::Agent(e.to_string()))?;
            let mut ctx = DecisionContext::Beer {
                scenario: &scenario,
                obs: &obs,
                rng: &mut policy_rngs[i],
            };
            match decide(agent, &prompts, &mut ctx, client, last_actions[i]) {
                Ok((action, transcript)) => {
                    sinks[i].append(&transcript)?;
                    if transcript.fallback {
                        fallback_decisions += 1;
                    }
                    fallbacks.push(transcript.fallback);
                    orders.push(action);
                    last_actions[i] = Some(action);
                }
                Err(AgentError::Client { agent_id, source, transcript }) => {
                    sinks[i].append(&transcript)?;
                    abort_reason = Some(format!("client failure for {agent_id}: {source}"));
                    break 'episode;
                }
                Err(e) => return Err(RunError::Agent(e.to_string())),
            }
        }
        let out = state.step(&orders)?;
        periods.push(BeerPeriodRecord {
            period: out.period,
            demand: out.demand,
            orders: out.orders,
            arrivals: out.arrivals,
            shipments: out.shipments,
            production_release: out.production_release,
            on_hand: state.stages.iter().map(|s| s.on_hand).collect(),
            backlogs: state.stages.iter().map(|s| s.backlog_to_downstream).collect(),
            rewards: out.rewards,
            chain_cost: out.chain_cost,
            fallbacks,
        });
    }

    Ok(EpisodeRecord {
        episode,
        seed,
        scenario_sha256: scenario_hash.to_string(),
        body: EpisodeBody::Beer(periods),
        flagged: abort_reason.is_some(),
        abort_reason,
        fallback_decisions,
    })
}

fn run_market_episode(
    experiment: &Scenario,
    market: &MarketScenario,
    episode: u32,
    seed: u64,
    scenario_hash: &str,
    client: &mut (dyn ChatClient + Send),
    transcript_dir: &Path,
) -> Result<EpisodeRecord, RunError> {
    let mut scenario = market.clone();
    scenario.seed = seed;
    let n = scenario.num_firms();
    let oracle: Option<EquilibriumSolution> = equilibrium(&scenario).ok();
    let needs_oracle = experiment.agents.iter().any(|a| {
        matches!(&a.kind, AgentKind::Scripted { policy: PolicyConfig::NashFixed })
    });
    if needs_oracle && oracle.is_none() {
        return Err(RunError::Agent(
            "nash_fixed agent configured but the scenario has no equilibrium".to_string(),
        ));
    }
    let mut state = MarketState::new(scenario.clone());
    let mut sinks = agent_sinks(&experiment.agents, transcript_dir)?;
    let mut policy_rngs: Vec<_> = experiment
        .agents
        .iter()
        .map(|a| rng::stream(seed, &format!("policy/{}", a.id)))
        .collect();
    let mut last_actions: Vec<Option<u32>> = vec![None; n];
    let mut rounds: Vec<MarketRoundRecord> = Vec::with_capacity(scenario.rounds as usize);
    let mut fallback_decisions = 0u32;
    let mut abort_reason: Option<String> = None;

    'episode: for _ in 0..scenario.rounds {
        let round = state.round + 1;
        let mut actions: Vec<u32> = Vec::with_capacity(n);
        let mut fallbacks: Vec<bool> = Vec::with_capacity(n);
        for i in 0..n {
            let agent = &experiment.agents[i];
            let history = MarketHistoryView::for_firm(&state, i);
            let prompts =
                render_market_prompts(&scenario, i, &agent.id, round, &history, oracle.as_ref())
                    .map_err(|e| RunError::Agent(e.to_string()))?;
            let mut ctx = DecisionContext::Market {
                scenario: &scenario,
                state: &state,
                firm_index: i,
                equilibrium: oracle.as_ref(),
                rng: &mut policy_rngs[i],
            };
            match decide(agent, &prompts, &mut ctx, client, last_actions[i]) {
                Ok((action, transcript)) => {
                    sinks[i].append(&transcript)?;
                    if transcript.fallback {
                        fallback_decisions += 1;
                    }
                    fallbacks.push(transcript.fallback);
                    actions.push(action);
                    last_actions[i] = Some(action);
                }
                Err(AgentError::Client { agent_id, source, transcript }) => {
                    sinks[i].append(&transcript)?;
                    abort_reason = Some(format!("client failure for {agent_id}: {source}"));
                    break 'episode;
                }
                Err(e) => return Err(RunError::Agent(e.to_string())),
            }
        }
        let outcome = state.apply_round(&actions)?;
        rounds.push(MarketRoundRecord {
            round: outcome.round,
            actions: outcome.actions,
            price: outcome.price,
            sales: outcome.sales,
            profits: outcome.profits,
            cumulative_reward: outcome.cumulative_reward,
            fallbacks,
        });
    }

    Ok(EpisodeRecord {
        episode,
        seed,
        scenario_sha256: scenario_hash.to_string(),
        body: EpisodeBody::Market(rounds),
        flagged: abort_reason.is_some(),
        abort_reason,
        fallback_decisions,
    })
}

/// One recorded-versus-recomputed mismatch found by `verify_episode`.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub location: String,
    pub recorded: String,
    pub recomputed: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: recorded {} but engine reproduces {}",
            self.location, self.recorded, self.recomputed
        )
    }
}

/// Re-run the engine on an episode's recorded actions and report every
/// field that fails to reproduce. An unflagged episode must come back
/// empty; divergences are reported, never silently patched.
pub fn verify_episode(scenario: &Scenario, record: &EpisodeRecord) -> Result<Vec<Divergence>, RunError> {
    let mut divergences = Vec::new();
    match (&scenario.game, &record.body) {
        (GameConfig::Beer(beer), EpisodeBody::Beer(periods)) => {
            let mut replay_scenario = beer.clone();
            replay_scenario.seed = record.seed;
            let mut state = BeerGameState::init(replay_scenario)?;
            for p in periods {
                let out = state.step(&p.orders)?;
                let loc = |field: &str| format!("period {} {}", p.period, field);
                compare(&mut divergences, loc("demand"), &p.demand, &out.demand);
                compare(&mut divergences, loc("arrivals"), &p.arrivals, &out.arrivals);
                compare(&mut divergences, loc("shipments"), &p.shipments, &out.shipments);
                compare(
                    &mut divergences,
                    loc("production_release"),
                    &p.production_release,
                    &out.production_release,
                );
                let on_hand: Vec<u32> = state.stages.iter().map(|s| s.on_hand).collect();
                let backlogs: Vec<u32> =
                    state.stages.iter().map(|s| s.backlog_to_downstream).collect();
                compare(&mut divergences, loc("on_hand"), &p.on_hand, &on_hand);
                compare(&mut divergences, loc("backlogs"), &p.backlogs, &backlogs);
                compare(&mut divergences, loc("rewards"), &p.rewards, &out.rewards);
                compare(&mut divergences, loc("chain_cost"), &p.chain_cost, &out.chain_cost);
            }
        }
        (GameConfig::Market(market), EpisodeBody::Market(rounds)) => {
            let mut replay_scenario = market.clone();
            replay_scenario.seed = record.seed;
            let mut state = MarketState::new(replay_scenario);
            for r in rounds {
                let out = state.apply_round(&r.actions)?;
                let loc = |field: &str| format!("round {} {}", r.round, field);
                compare(&mut divergences, loc("price"), &r.price, &out.price);
                compare(&mut divergences, loc("sales"), &r.sales, &out.sales);
                compare(&mut divergences, loc("profits"), &r.profits, &out.profits);
                compare(
                    &mut divergences,
                    loc("cumulative_reward"),
                    &r.cumulative_reward,
                    &out.cumulative_reward,
                );
            }
        }
        _ => {
            return Err(RunError::BadRunDirectory(
                "episode body does not match the scenario's game kind".to_string(),
            ))
        }
    }
    Ok(divergences)
}

fn compare<T: PartialEq + std::fmt::Debug>(
    divergences: &mut Vec<Divergence>,
    location: String,
    recorded: &T,
    recomputed: &T,
) {
    if recorded != recomputed {
        divergences.push(Divergence {
            location,
            recorded: format!("{recorded:?}"),
            recomputed: format!("{recomputed:?}"),
        });
    }
}

/// Load the manifest of a run directory.
pub fn load_manifest(run_dir: &Path) -> Result<Manifest, RunError> {
    let path = run_dir.join("manifest.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|_| RunError::BadRunDirectory(format!("{} has no manifest.json", run_dir.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load the scenario snapshot of a run directory.
pub fn load_run_scenario(run_dir: &Path) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(run_dir.join("scenario.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load every episode record listed in a run's manifest.
pub fn load_episodes(run_dir: &Path) -> Result<Vec<EpisodeRecord>, RunError> {
    let manifest = load_manifest(run_dir)?;
    manifest
        .episodes
        .iter()
        .map(|e| EpisodeRecord::read_jsonl(&run_dir.join(&e.file)))
        .collect()
}
