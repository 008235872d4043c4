//! Runs a policy over every version of a scenario and measures the outcome.
//!
//! Per version: the policy's plan is built from the defect history so far;
//! executed tests are the automated plus manually run ones; a fault counts as
//! detected when any executed test reveals it, and detected faults are
//! recorded against the revealing tests before the next version is planned.
//!
//! * execution minutes = manual minutes of manual runs + automated minutes / lanes
//! * deployment minutes = automation deploy cost of tests automated for the
//!   first time in the campaign + risk overhead per risk-scored test
//! * inclusiveness = share of fault-revealing tests that were executed
//! * precision = share of non-revealing tests that were not executed

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::plan::{build_plan, Plan, PlanError, Policy};
use crate::rational::Rational;
use crate::suite::{ingest_defects, SuiteError, TaggedDefect, TestSuite};

use super::scenario::{Scenario, ScenarioError, VersionSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionMetrics {
    pub label: String,
    pub exec_minutes: Rational,
    pub deploy_minutes: Rational,
    pub faults_total: usize,
    pub faults_detected: usize,
    pub faults_missed: usize,
    pub inclusiveness: Rational,
    pub precision: Rational,
    pub deploy_share: Rational,
    pub executed: usize,
    pub skipped: usize,
    pub automated: usize,
    pub newly_automated: usize,
    pub risk_scored: usize,
    /// Fault-revealing tests in the active suite, and how many of them ran.
    pub revealing: usize,
    pub revealing_executed: usize,
    pub non_revealing: usize,
    pub non_revealing_skipped: usize,
}

/// Campaign-level figures. Counts and minutes are totals or means over
/// versions depending on which aggregate this is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Aggregate {
    pub exec_minutes: Rational,
    pub deploy_minutes: Rational,
    pub faults_detected: Rational,
    pub faults_missed: Rational,
    pub inclusiveness: Rational,
    pub precision: Rational,
    pub deploy_share: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignMetrics {
    pub policy: Policy,
    pub versions: Vec<VersionMetrics>,
    /// Sums over versions; inclusiveness and precision pooled over all versions.
    pub total: Aggregate,
    /// Per-version means.
    pub average: Aggregate,
}

impl CampaignMetrics {
    pub fn total_missed(&self) -> usize {
        self.versions.iter().map(|v| v.faults_missed).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{policy}, version {version:?}: {source}")]
    Plan {
        policy: Policy,
        version: String,
        source: PlanError,
    },
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
}

fn deploy_share(deploy: Rational, exec: Rational) -> Rational {
    let sum = deploy + exec;
    if sum.is_zero() {
        Rational::ZERO
    } else {
        deploy / sum
    }
}

pub fn run_campaign(scenario: &Scenario, policy: Policy) -> Result<CampaignMetrics, SimError> {
    scenario.validate()?;
    let params = &scenario.params;
    let options = params.plan_options();
    let lanes = Rational::from_integer(params.lanes as i128);

    let mut suite: TestSuite = scenario.suite.clone();
    let mut ever_automated: HashSet<String> = HashSet::new();
    let mut versions = Vec::with_capacity(scenario.versions.len());

    for version in &scenario.versions {
        let plan = build_plan(policy, &suite, Some(&params.tree), &options).map_err(|source| {
            SimError::Plan {
                policy,
                version: version.label.clone(),
                source,
            }
        })?;
        let (metrics, found) = measure_version(&suite, &plan, version, lanes, params.risk_overhead_minutes_per_test, &mut ever_automated);
        suite = ingest_defects(&suite, &version.label, &found)?;
        versions.push(metrics);
    }

    let total = aggregate_total(&versions);
    let average = aggregate_mean(&versions);
    Ok(CampaignMetrics {
        policy,
        versions,
        total,
        average,
    })
}

fn measure_version(
    suite: &TestSuite,
    plan: &Plan,
    version: &VersionSpec,
    lanes: Rational,
    risk_overhead: Rational,
    ever_automated: &mut HashSet<String>,
) -> (VersionMetrics, Vec<TaggedDefect>) {
    let mut exec_manual = Rational::ZERO;
    let mut exec_auto = Rational::ZERO;
    let mut deploy = Rational::ZERO;
    let mut executed: HashSet<&str> = HashSet::new();
    let mut automated = 0;
    let mut newly_automated = 0;

    for entry in &plan.entries {
        let test = suite.get(&entry.test_id).expect("plans only name suite tests");
        if entry.disposition.is_executed() {
            executed.insert(test.id.as_str());
        }
        if entry.disposition.is_manual() {
            exec_manual += test.timing.manual_minutes;
        } else if entry.disposition == crate::plan::Disposition::Automate {
            automated += 1;
            exec_auto += test.timing.automated_minutes;
            if ever_automated.insert(test.id.clone()) {
                newly_automated += 1;
                deploy += test.timing.automation_deploy_minutes;
            }
        }
    }
    let risk_scored = plan.risk_scored();
    deploy += risk_overhead * Rational::from(risk_scored);
    let exec = exec_manual + exec_auto / lanes;

    let mut found = Vec::new();
    let mut detected = 0;
    let mut revealing: BTreeSet<&str> = BTreeSet::new();
    for fault in &version.faults {
        let hits: Vec<&String> = fault
            .detected_by
            .iter()
            .filter(|id| executed.contains(id.as_str()))
            .collect();
        revealing.extend(fault.detected_by.iter().map(String::as_str));
        if !hits.is_empty() {
            detected += 1;
            found.extend(hits.into_iter().map(|id| TaggedDefect {
                test_id: id.clone(),
                defect_id: fault.fault_id.clone(),
                severity: fault.severity.get() as i64,
            }));
        }
    }

    let active: Vec<&str> = plan.entries.iter().map(|e| e.test_id.as_str()).collect();
    let revealing_executed = revealing.iter().filter(|id| executed.contains(**id)).count();
    let non_revealing: Vec<&str> = active
        .iter()
        .copied()
        .filter(|id| !revealing.contains(id))
        .collect();
    let non_revealing_skipped = non_revealing.iter().filter(|id| !executed.contains(**id)).count();

    let metrics = VersionMetrics {
        label: version.label.clone(),
        exec_minutes: exec,
        deploy_minutes: deploy,
        faults_total: version.faults.len(),
        faults_detected: detected,
        faults_missed: version.faults.len() - detected,
        inclusiveness: Rational::ratio_or(revealing_executed, revealing.len(), Rational::ONE),
        precision: Rational::ratio_or(non_revealing_skipped, non_revealing.len(), Rational::ONE),
        deploy_share: deploy_share(deploy, exec),
        executed: executed.len(),
        skipped: active.len() - executed.len(),
        automated,
        newly_automated,
        risk_scored,
        revealing: revealing.len(),
        revealing_executed,
        non_revealing: non_revealing.len(),
        non_revealing_skipped,
    };
    (metrics, found)
}

fn aggregate_total(versions: &[VersionMetrics]) -> Aggregate {
    let exec: Rational = versions.iter().map(|v| v.exec_minutes).sum();
    let deploy: Rational = versions.iter().map(|v| v.deploy_minutes).sum();
    let sum = |f: fn(&VersionMetrics) -> usize| versions.iter().map(f).sum::<usize>();
    Aggregate {
        exec_minutes: exec,
        deploy_minutes: deploy,
        faults_detected: Rational::from(sum(|v| v.faults_detected)),
        faults_missed: Rational::from(sum(|v| v.faults_missed)),
        inclusiveness: Rational::ratio_or(sum(|v| v.revealing_executed), sum(|v| v.revealing), Rational::ONE),
        precision: Rational::ratio_or(
            sum(|v| v.non_revealing_skipped),
            sum(|v| v.non_revealing),
            Rational::ONE,
        ),
        deploy_share: deploy_share(deploy, exec),
    }
}

fn aggregate_mean(versions: &[VersionMetrics]) -> Aggregate {
    let mean = |f: fn(&VersionMetrics) -> Rational| {
        Rational::mean(&versions.iter().map(f).collect::<Vec<_>>())
    };
    Aggregate {
        exec_minutes: mean(|v| v.exec_minutes),
        deploy_minutes: mean(|v| v.deploy_minutes),
        faults_detected: mean(|v| Rational::from(v.faults_detected)),
        faults_missed: mean(|v| Rational::from(v.faults_missed)),
        inclusiveness: mean(|v| v.inclusiveness),
        precision: mean(|v| v.precision),
        deploy_share: mean(|v| v.deploy_share),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub campaigns: Vec<CampaignMetrics>,
}

impl ComparisonReport {
    pub fn campaign(&self, policy: Policy) -> Option<&CampaignMetrics> {
        self.campaigns.iter().find(|c| c.policy == policy)
    }
}

/// Runs each policy (in canonical order) over the same scenario.
pub fn compare(scenario: &Scenario, policies: &BTreeSet<Policy>) -> Result<ComparisonReport, SimError> {
    let campaigns = policies
        .iter()
        .map(|p| run_campaign(scenario, *p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComparisonReport {
        seed: scenario.params.seed,
        campaigns,
    })
}
