//! Multi-agent supply chain game laboratory.
//!
//! Two families of games share one agent harness:
//!
//! - the vertical beer distribution game ([`beer`]): a serial multi-echelon
//!   inventory chain with shipping delays, capacity limits, and holding /
//!   backlog costs, used to study order-variance amplification (the
//!   bullwhip effect) under different risk preferences and information
//!   regimes;
//! - horizontal market games ([`market`]): repeated Cournot quantity
//!   competition and Bertrand price competition (homogeneous and
//!   differentiated goods), each paired with an analytic Nash-equilibrium
//!   oracle.
//!
//! Agents are either scripted baseline policies ([`policies`]) or LLM
//! players driven through prompt templates ([`agents`]) and a pluggable
//! chat-completion client ([`llm`]) with a deterministic offline mock.
//! Completed episodes feed the analytics in [`metrics`], and [`runner`]
//! orchestrates scenario files, seeded episodes, persistence, and
//! plot-ready exports.

pub mod agents;
pub mod beer;
pub mod demand;
pub mod llm;
pub mod market;
pub mod metrics;
pub mod policies;
pub mod rng;
pub mod runner;
pub mod scenario;

pub use demand::{sample_demand, DemandModel};
pub use scenario::{BeerScenario, InfoMode, MarketModel, MarketScenario, RiskPreference};
