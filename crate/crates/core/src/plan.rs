//! Test plans for the four policies.
//!
//! * `retest-all` runs every active test manually.
//! * `tsra` scores all active tests and runs the top fraction by risk exposure.
//! * `atvm` classifies every test with the viability tree; tree-automate tests
//!   are automated and everything else still runs manually.
//! * `pt` classifies every test first; tree-automate tests are automated and the
//!   tree-manual tests form a pool that is risk-scored, with the top fraction run
//!   manually and the rest skipped.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::question::QuestionId;
use crate::rational::Rational;
use crate::risk::{
    self, BinningPopulation, RiskError, RiskRow, ScoreOptions, SelectionResult,
};
use crate::suite::{TestCase, TestSuite};
use crate::tree::{classify, Decision, DecisionTree, PathStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Policy {
    #[serde(rename = "retest-all")]
    RetestAll,
    #[serde(rename = "tsra")]
    Tsra,
    #[serde(rename = "atvm")]
    Atvm,
    #[serde(rename = "pt")]
    Pt,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::RetestAll, Policy::Tsra, Policy::Atvm, Policy::Pt];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::RetestAll => "retest-all",
            Policy::Tsra => "tsra",
            Policy::Atvm => "atvm",
            Policy::Pt => "pt",
        }
    }

    pub fn uses_tree(self) -> bool {
        matches!(self, Policy::Atvm | Policy::Pt)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown policy {0:?} (expected retest-all, tsra, atvm or pt)")]
pub struct UnknownPolicy(pub String);

impl FromStr for Policy {
    type Err = UnknownPolicy;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "retest-all" | "retestall" | "retest_all" => Ok(Policy::RetestAll),
            "tsra" => Ok(Policy::Tsra),
            "atvm" => Ok(Policy::Atvm),
            "pt" => Ok(Policy::Pt),
            _ => Err(UnknownPolicy(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    Automate,
    SelectManual,
    RunManual,
    Skip,
}

impl Disposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Disposition::Automate => "automate",
            Disposition::SelectManual => "select-manual",
            Disposition::RunManual => "run-manual",
            Disposition::Skip => "skip",
        }
    }

    pub fn is_executed(self) -> bool {
        self != Disposition::Skip
    }

    pub fn is_manual(self) -> bool {
        matches!(self, Disposition::SelectManual | Disposition::RunManual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rationale {
    #[serde(rename = "tree-yes")]
    TreeYes,
    #[serde(rename = "tree-no")]
    TreeNo,
    #[serde(rename = "tree-no+risk-selected")]
    TreeNoRiskSelected,
    #[serde(rename = "tree-no+risk-skipped")]
    TreeNoRiskSkipped,
    #[serde(rename = "policy-all")]
    PolicyAll,
    #[serde(rename = "risk-selected")]
    RiskSelected,
    #[serde(rename = "risk-skipped")]
    RiskSkipped,
}

impl Rationale {
    pub fn as_str(self) -> &'static str {
        match self {
            Rationale::TreeYes => "tree-yes",
            Rationale::TreeNo => "tree-no",
            Rationale::TreeNoRiskSelected => "tree-no+risk-selected",
            Rationale::TreeNoRiskSkipped => "tree-no+risk-skipped",
            Rationale::PolicyAll => "policy-all",
            Rationale::RiskSelected => "risk-selected",
            Rationale::RiskSkipped => "risk-skipped",
        }
    }

    /// Whether this rationale may accompany `disposition`.
    pub fn consistent_with(self, disposition: Disposition) -> bool {
        use Disposition as D;
        use Rationale as R;
        matches!(
            (disposition, self),
            (D::Automate, R::TreeYes)
                | (D::RunManual, R::TreeNo | R::PolicyAll)
                | (D::SelectManual, R::TreeNoRiskSelected | R::RiskSelected)
                | (D::Skip, R::TreeNoRiskSkipped | R::RiskSkipped)
        )
    }
}

/// Denominator of the PT selection quota.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionBasis {
    /// Tree-manual tests only.
    #[default]
    Pool,
    /// All active tests.
    Total,
}

impl FromStr for FractionBasis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pool" => Ok(FractionBasis::Pool),
            "total" => Ok(FractionBasis::Total),
            other => Err(format!("unknown fraction basis {other:?} (expected pool or total)")),
        }
    }
}

impl FractionBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            FractionBasis::Pool => "pool",
            FractionBasis::Total => "total",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlanOptions {
    pub fraction: Rational,
    pub fraction_basis: FractionBasis,
    pub exclude_zero_risk: bool,
    pub binning: BinningPopulation,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            fraction: Rational::new(7, 10),
            fraction_basis: FractionBasis::Pool,
            exclude_zero_risk: false,
            binning: BinningPopulation::Scored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    #[serde(rename = "id")]
    pub test_id: String,
    pub disposition: Disposition,
    pub rationale: Rationale,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<PathStep>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Plan {
    pub policy: Policy,
    pub parameters: Option<PlanOptions>,
    pub entries: Vec<PlanEntry>,
    pub selection: Option<SelectionResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PlanCounts {
    pub automate: usize,
    pub select: usize,
    pub run: usize,
    pub skip: usize,
}

impl Plan {
    pub fn counts(&self) -> PlanCounts {
        let mut c = PlanCounts::default();
        for e in &self.entries {
            match e.disposition {
                Disposition::Automate => c.automate += 1,
                Disposition::SelectManual => c.select += 1,
                Disposition::RunManual => c.run += 1,
                Disposition::Skip => c.skip += 1,
            }
        }
        c
    }

    pub fn ids_with(&self, disposition: Disposition) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|e| e.disposition == disposition)
            .map(|e| e.test_id.as_str())
            .collect()
    }

    pub fn entry(&self, id: &str) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| e.test_id == id)
    }

    /// Number of tests that went through risk scoring.
    pub fn risk_scored(&self) -> usize {
        self.entries.iter().filter(|e| e.risk.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("unclassifiable tests: {}", .0.iter().map(|(t, q)| format!("{t} (missing answer: Q{q})")).collect::<Vec<_>>().join(", "))]
    MissingAnswers(Vec<(String, QuestionId)>),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("policy {0} needs a decision tree")]
    TreeRequired(Policy),
}

fn active(suite: &TestSuite) -> Vec<&TestCase> {
    suite.tests.iter().filter(|t| t.is_active()).collect()
}

pub fn plan_retest_all(suite: &TestSuite) -> Plan {
    let entries = active(suite)
        .into_iter()
        .map(|t| PlanEntry {
            test_id: t.id.clone(),
            disposition: Disposition::RunManual,
            rationale: Rationale::PolicyAll,
            risk: None,
            path: None,
        })
        .collect();
    Plan {
        policy: Policy::RetestAll,
        parameters: None,
        entries,
        selection: None,
    }
}

pub fn plan_tsra(suite: &TestSuite, options: &PlanOptions) -> Result<Plan, PlanError> {
    let rows = risk::score_suite(suite, None);
    let selection = risk::select_top(&rows, options.fraction, options.exclude_zero_risk)?;
    let entries = risk_entries(
        rows,
        &selection,
        (Disposition::SelectManual, Rationale::RiskSelected),
        (Disposition::Skip, Rationale::RiskSkipped),
        &[],
    );
    Ok(Plan {
        policy: Policy::Tsra,
        parameters: Some(PlanOptions {
            fraction_basis: FractionBasis::Total,
            binning: BinningPopulation::Scored,
            ..*options
        }),
        entries,
        selection: Some(selection),
    })
}

type Classified<'a> = Vec<(&'a TestCase, Decision, Vec<PathStep>)>;

fn classify_all<'a>(suite: &'a TestSuite, tree: &DecisionTree) -> Result<Classified<'a>, PlanError> {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for t in active(suite) {
        match classify(tree, &t.answers) {
            Ok(c) => out.push((t, c.decision, c.path)),
            Err(m) => missing.push((t.id.clone(), m.0)),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(PlanError::MissingAnswers(missing))
    }
}

pub fn plan_atvm(suite: &TestSuite, tree: &DecisionTree) -> Result<Plan, PlanError> {
    let entries = classify_all(suite, tree)?
        .into_iter()
        .map(|(t, decision, path)| {
            let (disposition, rationale) = match decision {
                Decision::Automate => (Disposition::Automate, Rationale::TreeYes),
                Decision::Manual => (Disposition::RunManual, Rationale::TreeNo),
            };
            PlanEntry {
                test_id: t.id.clone(),
                disposition,
                rationale,
                risk: None,
                path: Some(path),
            }
        })
        .collect();
    Ok(Plan {
        policy: Policy::Atvm,
        parameters: None,
        entries,
        selection: None,
    })
}

/// Classify every test, then risk-select within the tree-manual pool.
pub fn plan_pt(suite: &TestSuite, tree: &DecisionTree, options: &PlanOptions) -> Result<Plan, PlanError> {
    let classified = classify_all(suite, tree)?;
    let total = classified.len();

    let mut entries = Vec::new();
    let mut pool = BTreeSet::new();
    let mut pool_paths = Vec::new();
    for (t, decision, path) in classified {
        match decision {
            Decision::Automate => entries.push(PlanEntry {
                test_id: t.id.clone(),
                disposition: Disposition::Automate,
                rationale: Rationale::TreeYes,
                risk: None,
                path: Some(path),
            }),
            Decision::Manual => {
                pool.insert(t.id.clone());
                pool_paths.push((t.id.clone(), path));
            }
        }
    }

    let basis = match options.fraction_basis {
        FractionBasis::Pool => pool.len(),
        FractionBasis::Total => total,
    };
    let quota = risk::quota_for(options.fraction, basis)?;
    let pool_size = pool.len();
    let rows = risk::score_suite_with(
        suite,
        &ScoreOptions {
            restrict: Some(pool),
            binning: options.binning,
            ..ScoreOptions::default()
        },
    )?;
    debug_assert_eq!(rows.len(), pool_size);
    let selection = risk::select_quota(&rows, quota, options.fraction, options.exclude_zero_risk);
    entries.extend(risk_entries(
        rows,
        &selection,
        (Disposition::SelectManual, Rationale::TreeNoRiskSelected),
        (Disposition::Skip, Rationale::TreeNoRiskSkipped),
        &pool_paths,
    ));

    Ok(Plan {
        policy: Policy::Pt,
        parameters: Some(*options),
        entries,
        selection: Some(selection),
    })
}

fn risk_entries(
    rows: Vec<RiskRow>,
    selection: &SelectionResult,
    chosen: (Disposition, Rationale),
    dropped: (Disposition, Rationale),
    paths: &[(String, Vec<PathStep>)],
) -> Vec<PlanEntry> {
    let selected: BTreeSet<&str> = selection.selected.iter().map(String::as_str).collect();
    rows.into_iter()
        .map(|row| {
            let (disposition, rationale) = if selected.contains(row.test_id.as_str()) {
                chosen
            } else {
                dropped
            };
            let path = paths
                .iter()
                .find(|(id, _)| *id == row.test_id)
                .map(|(_, p)| p.clone());
            PlanEntry {
                test_id: row.test_id.clone(),
                disposition,
                rationale,
                risk: Some(row),
                path,
            }
        })
        .collect()
}

/// Dispatches to the policy's planner.
pub fn build_plan(
    policy: Policy,
    suite: &TestSuite,
    tree: Option<&DecisionTree>,
    options: &PlanOptions,
) -> Result<Plan, PlanError> {
    match policy {
        Policy::RetestAll => Ok(plan_retest_all(suite)),
        Policy::Tsra => plan_tsra(suite, options),
        Policy::Atvm => plan_atvm(suite, tree.ok_or(PlanError::TreeRequired(policy))?),
        Policy::Pt => plan_pt(suite, tree.ok_or(PlanError::TreeRequired(policy))?, options),
    }
}

// ---------------------------------------------------------------------------
// Plan documents

#[derive(Serialize)]
struct PlanDocument<'a> {
    policy: Policy,
    parameters: Option<ParametersDoc>,
    summary: PlanCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<SelectionDoc>,
    entries: Vec<EntryDoc<'a>>,
}

#[derive(Serialize)]
struct ParametersDoc {
    fraction: Rational,
    fraction_basis: FractionBasis,
    exclude_zero_risk: bool,
    binning: BinningPopulation,
}

#[derive(Serialize)]
struct SelectionDoc {
    quota: usize,
    selected: usize,
    shortfall: usize,
}

#[derive(Serialize)]
struct EntryDoc<'a> {
    id: &'a str,
    disposition: Disposition,
    rationale: Rationale,
    #[serde(skip_serializing_if = "Option::is_none")]
    re: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    risk: Option<RiskDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a [PathStep]>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct RiskDoc {
    C: u8,
    N: usize,
    S: Rational,
    NS: Rational,
    P: u8,
    weight: Rational,
}

/// Self-describing plan file: policy, parameters, counts and per-test audit.
pub fn plan_to_json(plan: &Plan) -> String {
    let doc = PlanDocument {
        policy: plan.policy,
        parameters: plan.parameters.map(|p| ParametersDoc {
            fraction: p.fraction,
            fraction_basis: p.fraction_basis,
            exclude_zero_risk: p.exclude_zero_risk,
            binning: p.binning,
        }),
        summary: plan.counts(),
        selection: plan.selection.as_ref().map(|s| SelectionDoc {
            quota: s.quota,
            selected: s.selected.len(),
            shortfall: s.shortfall,
        }),
        entries: plan
            .entries
            .iter()
            .map(|e| EntryDoc {
                id: &e.test_id,
                disposition: e.disposition,
                rationale: e.rationale,
                re: e.risk.as_ref().map(|r| r.exposure),
                risk: e.risk.as_ref().map(|r| RiskDoc {
                    C: r.cost,
                    N: r.stats.defects,
                    S: r.stats.mean_severity,
                    NS: r.stats.ns,
                    P: r.probability,
                    weight: r.weight,
                }),
                path: e.path.as_deref(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}
