//! Seeded synthetic scenarios and viability trees.
//!
//! A single seed drives a ChaCha generator; each concern (suite, version `i`,
//! tree) reads from its own stream so adding a version never perturbs the
//! suite drawn for the same seed.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::plan::FractionBasis;
use crate::question::{Answer, QuestionId};
use crate::rational::Rational;
use crate::risk::BinningPopulation;
use crate::suite::{Cost, DefectRecord, Severity, TestCase, TestSuite, TimingProfile};
use crate::tree::{self, Decision, DecisionTree, TreeNode};

use super::campaign::SimError;
use super::scenario::{Fault, Scenario, ScenarioParams, VersionSpec};

const SUITE_STREAM: u64 = 0;
const TREE_STREAM: u64 = 1;
const VERSION_STREAM_BASE: u64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_tests: usize,
    pub n_versions: usize,
    /// Faults seeded per version, as a fraction of the suite size.
    pub fault_rate: Rational,
    pub seed: u64,
    pub manual_minutes: (u32, u32),
    pub automated_minutes: (u32, u32),
    pub deploy_minutes: (u32, u32),
    /// Each test starts with 0..=this many historical defects.
    pub max_prior_defects: u32,
    /// Each fault is revealed by 1..=this many tests.
    pub max_detectors: usize,
    pub fraction: Rational,
    pub fraction_basis: FractionBasis,
    pub lanes: u32,
    pub risk_overhead_minutes_per_test: Rational,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_tests: 20,
            n_versions: 3,
            fault_rate: Rational::new(1, 5),
            seed: 0,
            manual_minutes: (10, 60),
            automated_minutes: (1, 6),
            deploy_minutes: (30, 240),
            max_prior_defects: 3,
            max_detectors: 2,
            fraction: Rational::new(7, 10),
            fraction_basis: FractionBasis::Pool,
            lanes: 4,
            risk_overhead_minutes_per_test: Rational::ONE,
        }
    }
}

impl GeneratorParams {
    fn check(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Generator(m.to_string()));
        if self.n_tests < 1 {
            return bad("n_tests must be >= 1");
        }
        if self.fault_rate.is_negative() || self.fault_rate > Rational::ONE {
            return bad("fault_rate must be in [0, 1]");
        }
        for (name, (lo, hi)) in [
            ("manual_minutes", self.manual_minutes),
            ("automated_minutes", self.automated_minutes),
        ] {
            if lo == 0 || lo > hi {
                return Err(SimError::Generator(format!("{name} range must satisfy 0 < lo <= hi")));
            }
        }
        if self.deploy_minutes.0 > self.deploy_minutes.1 {
            return bad("deploy_minutes range must satisfy lo <= hi");
        }
        if self.max_detectors < 1 {
            return bad("max_detectors must be >= 1");
        }
        if self.lanes < 1 {
            return bad("lanes must be >= 1");
        }
        if self.fraction.is_negative() || self.fraction > Rational::ONE {
            return bad("fraction must be in [0, 1]");
        }
        if self.risk_overhead_minutes_per_test.is_negative() {
            return bad("risk_overhead_minutes_per_test must be >= 0");
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn minutes(rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)) -> Rational {
    Rational::from_integer(rng.random_range(lo..=hi) as i128)
}

/// Deterministic scenario for `params.seed` using the default tree.
pub fn generate_scenario(params: &GeneratorParams) -> Result<Scenario, SimError> {
    params.check()?;
    let mut rng = stream(params.seed, SUITE_STREAM);
    let width = params.n_tests.to_string().len().max(3);

    let tests: Vec<TestCase> = (0..params.n_tests)
        .map(|i| {
            let id = format!("T{:0width$}", i + 1);
            let mut t = TestCase::new(id.clone(), Cost::new(rng.random_range(1..=5)).expect("1..=5"));
            t.name = format!("generated test {}", i + 1);
            t.answers = QuestionId::all()
                .map(|q| (q, Answer::ALL[rng.random_range(0..3)]))
                .collect();
            t.timing = TimingProfile::new(
                minutes(&mut rng, params.manual_minutes),
                minutes(&mut rng, params.automated_minutes),
                minutes(&mut rng, params.deploy_minutes),
            );
            let prior = rng.random_range(0..=params.max_prior_defects);
            t.defects = (0..prior)
                .map(|k| DefectRecord {
                    defect_id: format!("H-{id}-{k}"),
                    severity: Severity::new(rng.random_range(1..=5)).expect("1..=5"),
                    version: "history".into(),
                })
                .collect();
            t
        })
        .collect();
    let ids: Vec<String> = tests.iter().map(|t| t.id.clone()).collect();

    // nearest integer, halves rounded up
    let faults_per_version =
        (params.fault_rate * Rational::from(params.n_tests) + Rational::new(1, 2)).floor_int() as usize;
    let versions = (0..params.n_versions)
        .map(|v| {
            let mut rng = stream(params.seed, VERSION_STREAM_BASE + v as u64);
            let faults = (0..faults_per_version)
                .map(|k| {
                    let n_detectors = rng.random_range(1..=params.max_detectors.min(params.n_tests));
                    let detected_by: BTreeSet<String> = sample(&mut rng, params.n_tests, n_detectors)
                        .into_iter()
                        .map(|i| ids[i].clone())
                        .collect();
                    Fault {
                        fault_id: format!("F{}-{}", v + 1, k + 1),
                        severity: Severity::new(rng.random_range(1..=5)).expect("1..=5"),
                        detected_by,
                    }
                })
                .collect();
            VersionSpec {
                label: format!("v{}", v + 1),
                faults,
            }
        })
        .collect();

    Ok(Scenario {
        suite: TestSuite {
            name: format!("generated-{}", params.seed),
            tests,
        },
        versions,
        params: ScenarioParams {
            fraction: params.fraction,
            fraction_basis: params.fraction_basis,
            exclude_zero_risk: false,
            binning: BinningPopulation::Scored,
            lanes: params.lanes,
            risk_overhead_minutes_per_test: params.risk_overhead_minutes_per_test,
            tree: tree::default_tree(),
            seed: params.seed,
        },
    })
}

/// Random valid viability tree: total branches, no repeated questions, both
/// leaf kinds present.
pub fn generate_tree(seed: u64) -> DecisionTree {
    let mut rng = stream(seed, TREE_STREAM);
    loop {
        let mut unused: Vec<QuestionId> = QuestionId::all().collect();
        let root = random_question(&mut rng, &mut unused, 0);
        let tree = DecisionTree {
            label: format!("random-{seed}"),
            comment: String::new(),
            root,
        };
        if tree::validate_tree(&tree).is_valid() {
            return tree;
        }
    }
}

fn random_question(rng: &mut ChaCha8Rng, available: &mut Vec<QuestionId>, depth: usize) -> TreeNode {
    let idx = rng.random_range(0..available.len());
    let question = available.remove(idx);
    let child = |rng: &mut ChaCha8Rng| random_node(rng, &mut available.clone(), depth + 1);
    let high = child(rng);
    let medium = child(rng);
    let low = child(rng);
    TreeNode::question(question, high, medium, low)
}

fn random_node(rng: &mut ChaCha8Rng, available: &mut Vec<QuestionId>, depth: usize) -> TreeNode {
    // leaves get likelier with depth; depth 4 or an exhausted question set always stops
    let stop = available.is_empty() || depth >= 4 || rng.random_range(0..4) < depth;
    if stop {
        let decision = if rng.random_bool(0.5) {
            Decision::Automate
        } else {
            Decision::Manual
        };
        TreeNode::Leaf(decision)
    } else {
        random_question(rng, available, depth)
    }
}
