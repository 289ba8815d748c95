//! Transcript capture: the full message log of every LLM exchange,
//! persisted through an append-only JSON-lines sink before the parsed
//! action is handed to an engine.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::llm::ChatMessage;

/// One agent decision: prompts, raw replies (including retries), and the
/// parse outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub agent_id: String,
    /// 1-based round/period the decision was for.
    pub round: u32,
    /// Ordered exchange: system, user, assistant, corrective user, ...
    pub messages: Vec<ChatMessage>,
    /// The last raw model reply.
    pub raw_response: String,
    /// Present iff a reply parsed successfully.
    pub parsed_action: Option<u32>,
    /// Parse retries spent (not transport retries).
    pub retry_count: u32,
    /// The fallback action was used after exhausting retries.
    pub fallback: bool,
}

impl Transcript {
    pub fn scripted(agent_id: &str, round: u32, action: u32) -> Self {
        Transcript {
            agent_id: agent_id.to_string(),
            round,
            messages: Vec::new(),
            raw_response: String::new(),
            parsed_action: Some(action),
            retry_count: 0,
            fallback: false,
        }
    }
}

/// Append-only JSONL writer, flushed after every record.
pub struct TranscriptSink {
    writer: BufWriter<File>,
}

impl TranscriptSink {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(TranscriptSink { writer: BufWriter::new(file) })
    }

    pub fn append(&mut self, transcript: &Transcript) -> std::io::Result<()> {
        let line = serde_json::to_string(transcript)?;
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sink_appends_one_line_per_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcripts").join("agent.jsonl");
        let mut sink = TranscriptSink::create(&path).unwrap();
        for round in 1..=3 {
            sink.append(&Transcript::scripted("retailer", round, 4)).unwrap();
        }
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(lines.len(), 3);
        let parsed: Transcript = serde_json::from_str(lines[2]).unwrap();
        assert_eq!(parsed.round, 3);
        assert_eq!(parsed.parsed_action, Some(4));
    }
}
