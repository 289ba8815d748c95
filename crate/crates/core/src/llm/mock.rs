//! Deterministic offline stand-in for a live endpoint. With the mock
//! installed, entire experiment runs are reproducible byte for byte.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng;

use super::{ChatClient, ChatMessage, ClientError, Completion};

/// Serializable mock behavior, recorded in the run manifest so a run
/// directory alone suffices to re-execute the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MockSpec {
    /// Reply with a bracketed integer drawn uniformly from [lo, hi] on a
    /// stream derived from the episode seed.
    Seeded { lo: u32, hi: u32 },
    /// Fixed reply script consumed in call order, wrapping around when
    /// exhausted. Entries without a bracketed integer exercise the
    /// retry/fallback paths.
    Replies { replies: Vec<String> },
}

pub struct MockClient {
    spec: MockSpec,
    stream: ChaCha8Rng,
    calls: u32,
}

impl MockClient {
    pub fn new(spec: MockSpec, episode_seed: u64) -> Self {
        MockClient {
            spec,
            stream: rng::stream(episode_seed, "mock"),
            calls: 0,
        }
    }

    pub fn calls(&self) -> u32 {
        self.calls
    }
}

impl ChatClient for MockClient {
    fn complete(
        &mut self,
        _model: &str,
        _messages: &[ChatMessage],
        _temperature: f64,
    ) -> Result<Completion, ClientError> {
        let text = match &self.spec {
            MockSpec::Seeded { lo, hi } => {
                let k = self.stream.random_range(*lo..=*hi);
                format!("Deterministic mock decision. [{k}]")
            }
            MockSpec::Replies { replies } => {
                if replies.is_empty() {
                    return Err(ClientError::MockExhausted { calls: self.calls });
                }
                replies[self.calls as usize % replies.len()].clone()
            }
        };
        self.calls += 1;
        Ok(Completion {
            text,
            prompt_tokens: None,
            completion_tokens: None,
            retries: 0,
        })
    }
}
