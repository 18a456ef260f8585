//! Scenario files, nominal-trajectory synthesis, the receding-horizon
//! simulation loop, and metric emission.

mod metrics;
mod scenario;
mod sim;

pub use metrics::{emit_metrics, read_trajectory, summarize, write_trajectory, RunSummary};
pub use scenario::{
    load_scenario, parse_scenario, write_scenario, Keyframe, Lane, Limits, ObstacleScript,
    Scenario, ScenarioError,
};
pub use sim::{
    run_receding_horizon, synthesize_nominal, CycleLog, CycleMetrics, RunOutcome, SeedMode,
};
