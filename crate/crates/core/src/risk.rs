//! Risk-exposure scoring and safety-test selection.
//!
//! For each test: `N` defects with mean severity `S` give the estimate
//! `N×S`. Tests with no defects get severity probability `P = 0`; the rest
//! are ranked by `N×S` and split into five equal percentile bands scored
//! 5 (top fifth) down to 1 (bottom fifth). Risk exposure is
//! `RE = weight × P × C`. Selection keeps the top `⌈f·n⌉` rows.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::Serialize;

use crate::rational::Rational;
use crate::suite::{TestCase, TestSuite};

pub const MAX_PROBABILITY: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectStats {
    pub test_id: String,
    /// N
    pub defects: usize,
    /// S, zero without defects.
    pub mean_severity: Rational,
    /// N×S
    pub ns: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiskRow {
    pub test_id: String,
    pub stats: DefectStats,
    pub probability: u8,
    pub cost: u8,
    pub weight: Rational,
    pub exposure: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionResult {
    pub selected: Vec<String>,
    pub excluded: Vec<String>,
    pub fraction: Rational,
    /// Number of rows the fraction asked for.
    pub quota: usize,
    /// Quota left unmet because zero-risk rows were withheld.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RiskError {
    #[error("severity probability {0} is outside 0..5")]
    ProbabilityOutOfRange(i64),
    #[error("cost {0} is outside 1..5")]
    CostOutOfRange(i64),
    #[error("weight {0} is negative")]
    NegativeWeight(Rational),
    #[error("fraction {0} is outside [0, 1]")]
    FractionOutOfRange(Rational),
    #[error("probability override {probability} for test {test:?} is inconsistent with its {defects} defect(s)")]
    InconsistentOverride {
        test: String,
        probability: u8,
        defects: usize,
    },
}

/// Which tests the percentile bands are computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinningPopulation {
    /// Only the tests being scored.
    #[default]
    Scored,
    /// All active tests of the suite, even when scoring a subset.
    Suite,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    pub restrict: Option<BTreeSet<String>>,
    pub binning: BinningPopulation,
    /// Fixed P values that replace the banded ones for the named tests.
    pub probability_overrides: BTreeMap<String, u8>,
}

pub fn defect_stats(test: &TestCase) -> DefectStats {
    let n = test.defects.len();
    let total: Rational = test
        .defects
        .iter()
        .map(|d| Rational::from(d.severity.get()))
        .sum();
    let mean = if n == 0 {
        Rational::ZERO
    } else {
        total / Rational::from(n)
    };
    DefectStats {
        test_id: test.id.clone(),
        defects: n,
        mean_severity: mean,
        ns: Rational::from(n) * mean,
    }
}

/// P for every entry of `stats`, keyed by test id in input order.
///
/// Ties on `N×S` share the best (highest) band among their positions.
pub fn severity_probabilities(stats: &[DefectStats]) -> IndexMap<String, u8> {
    let mut with_defects: Vec<&DefectStats> = stats.iter().filter(|s| s.defects > 0).collect();
    with_defects.sort_by_key(|s| std::cmp::Reverse(s.ns));
    let n = with_defects.len();

    let mut banded: BTreeMap<&str, u8> = BTreeMap::new();
    let mut first_of_run = 0;
    for (pos, s) in with_defects.iter().enumerate() {
        if pos > 0 && with_defects[pos - 1].ns != s.ns {
            first_of_run = pos;
        }
        banded.insert(s.test_id.as_str(), band(first_of_run, n));
    }

    stats
        .iter()
        .map(|s| {
            let p = if s.defects == 0 {
                0
            } else {
                banded[s.test_id.as_str()]
            };
            (s.test_id.clone(), p)
        })
        .collect()
}

/// Band score of 0-based position `pos` among `n`: `[0,20)%` → 5 … `[80,100]%` → 1.
fn band(pos: usize, n: usize) -> u8 {
    MAX_PROBABILITY - ((5 * pos) / n) as u8
}

pub fn risk_exposure(probability: i64, cost: i64, weight: Rational) -> Result<Rational, RiskError> {
    if !(0..=MAX_PROBABILITY as i64).contains(&probability) {
        return Err(RiskError::ProbabilityOutOfRange(probability));
    }
    if !(1..=5).contains(&cost) {
        return Err(RiskError::CostOutOfRange(cost));
    }
    if weight.is_negative() {
        return Err(RiskError::NegativeWeight(weight));
    }
    Ok(weight * Rational::from(probability) * Rational::from(cost))
}

/// Descending RE, ties by ascending test id.
pub fn row_order(a: &RiskRow, b: &RiskRow) -> Ordering {
    b.exposure
        .cmp(&a.exposure)
        .then_with(|| a.test_id.cmp(&b.test_id))
}

/// Scores active tests (or the restricted subset of them), binning over the scored set.
pub fn score_suite(suite: &TestSuite, restrict: Option<&BTreeSet<String>>) -> Vec<RiskRow> {
    let options = ScoreOptions {
        restrict: restrict.cloned(),
        ..ScoreOptions::default()
    };
    score_suite_with(suite, &options).expect("no overrides to reject")
}

pub fn score_suite_with(suite: &TestSuite, options: &ScoreOptions) -> Result<Vec<RiskRow>, RiskError> {
    let active: Vec<&TestCase> = suite.tests.iter().filter(|t| t.is_active()).collect();
    let scored: Vec<&TestCase> = match &options.restrict {
        Some(ids) => active.iter().copied().filter(|t| ids.contains(&t.id)).collect(),
        None => active.clone(),
    };
    let population: &[&TestCase] = match options.binning {
        BinningPopulation::Scored => &scored,
        BinningPopulation::Suite => &active,
    };
    let pop_stats: Vec<DefectStats> = population.iter().map(|t| defect_stats(t)).collect();
    let probabilities = severity_probabilities(&pop_stats);

    let mut rows = Vec::with_capacity(scored.len());
    for test in scored {
        let stats = defect_stats(test);
        let probability = match options.probability_overrides.get(&test.id) {
            Some(&p) => {
                if p > MAX_PROBABILITY || (p == 0) != (stats.defects == 0) {
                    return Err(RiskError::InconsistentOverride {
                        test: test.id.clone(),
                        probability: p,
                        defects: stats.defects,
                    });
                }
                p
            }
            None => probabilities[&test.id],
        };
        let exposure = risk_exposure(probability as i64, test.cost.get() as i64, test.weight)?;
        rows.push(RiskRow {
            test_id: test.id.clone(),
            stats,
            probability,
            cost: test.cost.get(),
            weight: test.weight,
            exposure,
        });
    }
    rows.sort_by(row_order);
    Ok(rows)
}

fn check_fraction(fraction: Rational) -> Result<(), RiskError> {
    if fraction.is_negative() || fraction > Rational::ONE {
        return Err(RiskError::FractionOutOfRange(fraction));
    }
    Ok(())
}

/// `⌈fraction × n⌉`
pub fn quota_for(fraction: Rational, n: usize) -> Result<usize, RiskError> {
    check_fraction(fraction)?;
    Ok((fraction * Rational::from(n)).ceil_int() as usize)
}

/// Keeps the first `⌈fraction × rows.len()⌉` rows (rows must be in [`row_order`]).
pub fn select_top(
    rows: &[RiskRow],
    fraction: Rational,
    exclude_zero_risk: bool,
) -> Result<SelectionResult, RiskError> {
    let quota = quota_for(fraction, rows.len())?;
    Ok(select_quota(rows, quota, fraction, exclude_zero_risk))
}

/// Keeps the first `quota` rows (capped at `rows.len()`); zero-risk rows are
/// withheld when `exclude_zero_risk` is set.
pub fn select_quota(
    rows: &[RiskRow],
    quota: usize,
    fraction: Rational,
    exclude_zero_risk: bool,
) -> SelectionResult {
    let quota = quota.min(rows.len());
    let mut selected = Vec::with_capacity(quota);
    let mut excluded = Vec::new();
    for row in rows {
        let eligible = !(exclude_zero_risk && row.exposure.is_zero());
        if selected.len() < quota && eligible {
            selected.push(row.test_id.clone());
        } else {
            excluded.push(row.test_id.clone());
        }
    }
    SelectionResult {
        shortfall: quota - selected.len(),
        selected,
        excluded,
        fraction,
        quota,
    }
}
