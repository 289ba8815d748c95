//! Deterministic state machine for the multi-echelon beer distribution
//! game. Stage index 0 is the retailer facing end-customer demand; the
//! last stage is the manufacturer drawing on an unconstrained raw-material
//! supply through its production queue.

mod engine;
mod observe;

pub use engine::{BeerGameState, EngineError, PipelineEntry, StageState, StepOutcome};
pub use observe::{observe, Observation, ObservationConfig, UpstreamInfo};

/// Human-readable stage name used in prompts and reports.
pub fn stage_name(stage_index: usize, num_stages: usize) -> String {
    if stage_index == 0 {
        "retailer".to_string()
    } else if stage_index + 1 == num_stages {
        "manufacturer".to_string()
    } else if stage_index == 1 {
        "wholesaler".to_string()
    } else if stage_index == 2 {
        "distributor".to_string()
    } else {
        format!("intermediary {}", stage_index + 1)
    }
}
