//! Regression-test planning toolkit.
//!
//! * [`suite`]: test-suite model, suite documents, defect ingestion
//! * [`tree`]: automation-viability decision trees
//! * [`risk`]: risk exposure `RE = weight × P × C` and top-fraction selection
//! * [`plan`]: retest-all, risk selection (TSRA), automation (ATVM) and the
//!   hybrid (PT) planners
//! * [`sim`]: multi-version campaign simulation and policy comparison
//! * [`report`]: table / CSV / JSON renderings

pub mod plan;
pub mod question;
pub mod rational;
pub mod report;
pub mod risk;
pub mod sim;
pub mod suite;
pub mod tree;

pub use plan::{Disposition, Plan, PlanOptions, Policy};
pub use question::{Answer, QuestionId};
pub use rational::Rational;
pub use suite::{TestCase, TestSuite};
pub use tree::{Decision, DecisionTree};
