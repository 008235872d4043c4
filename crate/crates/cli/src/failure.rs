//! Maps library errors onto the exit-code contract.

use regplan_core::plan::PlanError;
use regplan_core::risk::RiskError;
use regplan_core::sim::{ScenarioError, SimError};
use regplan_core::suite::SuiteError;
use regplan_core::tree::TreeError;

pub const DOMAIN: u8 = 1;
pub const INVALID: u8 = 2;
pub const IO: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn domain(message: impl Into<String>) -> Self {
        Failure { code: DOMAIN, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: INVALID, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure { code: IO, message: message.into() }
    }
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        Failure::invalid(format!("suite: {e}"))
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        Failure::invalid(format!("tree: {e}"))
    }
}

impl From<RiskError> for Failure {
    fn from(e: RiskError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::MissingAnswers(_) => Failure::domain(e.to_string()),
            other => Failure::invalid(other.to_string()),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Failure::io(e.to_string()),
            other => Failure::invalid(format!("scenario: {other}")),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Scenario(s) => s.into(),
            SimError::Plan { source: PlanError::MissingAnswers(_), .. } => Failure::domain(e.to_string()),
            other => Failure::invalid(other.to_string()),
        }
    }
}
