//! Episode records and their on-disk form: one JSON-lines file per
//! episode (header line, then one line per period or round), plus the run
//! manifest that makes a run directory self-describing and replayable.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunError;

/// One beer-game period as persisted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeerPeriodRecord {
    pub period: u32,
    pub demand: u32,
    pub orders: Vec<u32>,
    pub arrivals: Vec<u32>,
    pub shipments: Vec<u32>,
    pub production_release: u32,
    pub on_hand: Vec<u32>,
    pub backlogs: Vec<u32>,
    pub rewards: Vec<f64>,
    pub chain_cost: f64,
    /// Which agents fell back to a default action this period.
    pub fallbacks: Vec<bool>,
}

/// One market round as persisted; mirrors the round outcome box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketRoundRecord {
    pub round: u32,
    pub actions: Vec<u32>,
    pub price: Option<f64>,
    pub sales: Option<Vec<f64>>,
    pub profits: Vec<f64>,
    pub cumulative_reward: f64,
    pub fallbacks: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EpisodeBody {
    Beer(Vec<BeerPeriodRecord>),
    Market(Vec<MarketRoundRecord>),
}

/// Everything recorded about one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub seed: u64,
    pub scenario_sha256: String,
    pub body: EpisodeBody,
    /// The episode aborted before completing its horizon.
    pub flagged: bool,
    pub abort_reason: Option<String>,
    pub fallback_decisions: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EpisodeHeader {
    episode: u32,
    seed: u64,
    scenario_sha256: String,
    game: String,
    flagged: bool,
    abort_reason: Option<String>,
    fallback_decisions: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RecordLine {
    Header(EpisodeHeader),
    Period(BeerPeriodRecord),
    Round(MarketRoundRecord),
}

impl EpisodeRecord {
    pub fn write_jsonl(&self, path: &Path) -> Result<(), RunError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        let header = RecordLine::Header(EpisodeHeader {
            episode: self.episode,
            seed: self.seed,
            scenario_sha256: self.scenario_sha256.clone(),
            game: match &self.body {
                EpisodeBody::Beer(_) => "beer".to_string(),
                EpisodeBody::Market(_) => "market".to_string(),
            },
            flagged: self.flagged,
            abort_reason: self.abort_reason.clone(),
            fallback_decisions: self.fallback_decisions,
        });
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        match &self.body {
            EpisodeBody::Beer(periods) => {
                for p in periods {
                    writeln!(w, "{}", serde_json::to_string(&RecordLine::Period(p.clone()))?)?;
                }
            }
            EpisodeBody::Market(rounds) => {
                for r in rounds {
                    writeln!(w, "{}", serde_json::to_string(&RecordLine::Round(r.clone()))?)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Self, RunError> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let mut header: Option<EpisodeHeader> = None;
        let mut periods = Vec::new();
        let mut rounds = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<RecordLine>(&line)? {
                RecordLine::Header(h) => header = Some(h),
                RecordLine::Period(p) => periods.push(p),
                RecordLine::Round(r) => rounds.push(r),
            }
        }
        let header = header.ok_or_else(|| {
            RunError::BadRunDirectory(format!("{}: missing header line", path.display()))
        })?;
        let body = match header.game.as_str() {
            "beer" => EpisodeBody::Beer(periods),
            _ => EpisodeBody::Market(rounds),
        };
        Ok(EpisodeRecord {
            episode: header.episode,
            seed: header.seed,
            scenario_sha256: header.scenario_sha256,
            body,
            flagged: header.flagged,
            abort_reason: header.abort_reason,
            fallback_decisions: header.fallback_decisions,
        })
    }
}

/// Run-level index: everything required to re-execute the run with the
/// mock client using only the run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub scenario_sha256: String,
    pub package_version: String,
    pub repetitions: u32,
    pub seeds: Vec<u64>,
    pub client: super::ClientSelector,
    pub episodes: Vec<EpisodeStatus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStatus {
    pub episode: u32,
    pub seed: u64,
    /// Path relative to the run directory.
    pub file: String,
    pub flagged: bool,
    pub fallback_decisions: u32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episode_record_roundtrips_through_jsonl() {
        let record = EpisodeRecord {
            episode: 0,
            seed: 42,
            scenario_sha256: "ab".to_string(),
            body: EpisodeBody::Beer(vec![BeerPeriodRecord {
                period: 0,
                demand: 4,
                orders: vec![4, 4],
                arrivals: vec![0, 0],
                shipments: vec![4, 4],
                production_release: 4,
                on_hand: vec![8, 8],
                backlogs: vec![0, 0],
                rewards: vec![-4.0, -4.0],
                chain_cost: 8.0,
                fallbacks: vec![false, false],
            }]),
            flagged: false,
            abort_reason: None,
            fallback_decisions: 0,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes").join("ep_0000.jsonl");
        record.write_jsonl(&path).unwrap();
        let back = EpisodeRecord::read_jsonl(&path).unwrap();
        assert_eq!(record, back);
    }

    #[test]
    fn sha256_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
