//! Multi-version regression campaign simulation.

mod campaign;
mod generate;
mod scenario;

pub use campaign::{compare, run_campaign, Aggregate, CampaignMetrics, ComparisonReport, SimError, VersionMetrics};
pub use generate::{generate_scenario, generate_tree, GeneratorParams};
pub use scenario::{
    load_scenario, load_scenario_file, reference_scenario, reference_scenario_document, scenario_to_json, Fault,
    Scenario, ScenarioError, ScenarioParams, VersionSpec,
};
