//! Multi-version campaign scenarios and their JSON documents.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::plan::{FractionBasis, PlanOptions};
use crate::rational::{self, Rational};
use crate::risk::BinningPopulation;
use crate::suite::{self, LoadOptions, Severity, SuiteError, TestSuite};
use crate::tree::{self, DecisionTree, TreeError};

const REFERENCE_SCENARIO: &str = include_str!("../../data/reference_scenario.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub fault_id: String,
    pub severity: Severity,
    /// Tests that reveal the fault when executed.
    pub detected_by: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionSpec {
    pub label: String,
    pub faults: Vec<Fault>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioParams {
    pub fraction: Rational,
    pub fraction_basis: FractionBasis,
    pub exclude_zero_risk: bool,
    pub binning: BinningPopulation,
    /// Parallel lanes automated tests are spread over.
    pub lanes: u32,
    pub risk_overhead_minutes_per_test: Rational,
    pub tree: DecisionTree,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            fraction: Rational::new(7, 10),
            fraction_basis: FractionBasis::Pool,
            exclude_zero_risk: false,
            binning: BinningPopulation::Scored,
            lanes: 4,
            risk_overhead_minutes_per_test: Rational::ONE,
            tree: tree::default_tree(),
            seed: 0,
        }
    }
}

impl ScenarioParams {
    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            fraction: self.fraction,
            fraction_basis: self.fraction_basis,
            exclude_zero_risk: self.exclude_zero_risk,
            binning: self.binning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub suite: TestSuite,
    pub versions: Vec<VersionSpec>,
    pub params: ScenarioParams,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Malformed(String),
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("suite: {0}")]
    Suite(#[from] SuiteError),
    #[error("tree: {0}")]
    Tree(#[from] TreeError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    /// Checks cross-references: faults name existing active tests, ids are unique, ranges hold.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let p = &self.params;
        if p.lanes < 1 {
            return Err(ScenarioError::Invalid("lanes must be >= 1".into()));
        }
        if p.fraction.is_negative() || p.fraction > Rational::ONE {
            return Err(ScenarioError::Invalid(format!("fraction {} is outside [0, 1]", p.fraction)));
        }
        if p.risk_overhead_minutes_per_test.is_negative() {
            return Err(ScenarioError::Invalid("risk_overhead_minutes_per_test must be >= 0".into()));
        }
        let active: HashSet<&str> = self
            .suite
            .tests
            .iter()
            .filter(|t| t.is_active())
            .map(|t| t.id.as_str())
            .collect();
        let mut labels = HashSet::new();
        for v in &self.versions {
            if !labels.insert(v.label.as_str()) {
                return Err(ScenarioError::Invalid(format!("duplicate version label {:?}", v.label)));
            }
            let mut ids = HashSet::new();
            for f in &v.faults {
                if !ids.insert(f.fault_id.as_str()) {
                    return Err(ScenarioError::Invalid(format!(
                        "version {:?}: duplicate fault id {:?}",
                        v.label, f.fault_id
                    )));
                }
                if f.detected_by.is_empty() {
                    return Err(ScenarioError::Invalid(format!(
                        "version {:?}: fault {:?} has no detecting test",
                        v.label, f.fault_id
                    )));
                }
                if let Some(missing) = f.detected_by.iter().find(|id| !active.contains(id.as_str())) {
                    return Err(ScenarioError::Invalid(format!(
                        "version {:?}: fault {:?} names {:?}, which is not an active test",
                        v.label, f.fault_id, missing
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The frozen 20-test, 3-version reference campaign.
pub fn reference_scenario() -> Scenario {
    load_scenario(REFERENCE_SCENARIO, None).expect("shipped reference scenario is valid")
}

pub fn reference_scenario_document() -> &'static str {
    REFERENCE_SCENARIO
}

/// Parses a scenario document. String references to suite or tree files are
/// resolved against `base_dir`; the tree reference `"default"` needs no file.
pub fn load_scenario(document: &str, base_dir: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
    let root = value.as_object().ok_or_else(|| shape("", "expected an object"))?;
    check_keys(root, "", &["suite", "versions", "params"])?;

    let suite = match root.get("suite") {
        Some(Value::String(path)) => {
            let text = read_ref(base_dir, path)?;
            suite::load_suite(&text)?
        }
        Some(v @ Value::Object(_)) => suite::suite_from_value(v, LoadOptions::default())?,
        _ => return Err(shape("suite", "expected an inline suite object or a file path")),
    };

    let versions = match root.get("versions") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| parse_version(v, &format!("versions[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(shape("versions", "expected an array")),
    };

    let params = match root.get("params") {
        Some(v) => parse_params(v, base_dir)?,
        None => ScenarioParams::default(),
    };

    let scenario = Scenario {
        suite,
        versions,
        params,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_scenario(&text, path.parent())
}

fn shape(path: &str, message: &str) -> ScenarioError {
    ScenarioError::Shape {
        path: if path.is_empty() { "scenario".into() } else { path.into() },
        message: message.into(),
    }
}

fn check_keys(map: &Map<String, Value>, path: &str, known: &[&str]) -> Result<(), ScenarioError> {
    match map.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(shape(path, &format!("unknown key {k:?}"))),
        None => Ok(()),
    }
}

fn read_ref(base_dir: Option<&Path>, reference: &str) -> Result<String, ScenarioError> {
    let path: PathBuf = match base_dir {
        Some(dir) => dir.join(reference),
        None => PathBuf::from(reference),
    };
    std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn get_str(map: &Map<String, Value>, key: &str, path: &str) -> Result<String, ScenarioError> {
    map.get(key)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| shape(&format!("{path}.{key}"), "expected a string"))
}

fn get_number(value: &Value, path: &str) -> Result<Rational, ScenarioError> {
    match value {
        Value::Number(n) => rational::from_json_number(n).map_err(|e| shape(path, &e.to_string())),
        _ => Err(shape(path, "expected a number")),
    }
}

fn parse_version(value: &Value, path: &str) -> Result<VersionSpec, ScenarioError> {
    let map = value.as_object().ok_or_else(|| shape(path, "expected an object"))?;
    check_keys(map, path, &["label", "faults"])?;
    let label = get_str(map, "label", path)?;
    let mut faults = Vec::new();
    if let Some(v) = map.get("faults") {
        let items = v
            .as_array()
            .ok_or_else(|| shape(&format!("{path}.faults"), "expected an array"))?;
        for (i, f) in items.iter().enumerate() {
            let fp = format!("{path}.faults[{i}]");
            let fm = f.as_object().ok_or_else(|| shape(&fp, "expected an object"))?;
            check_keys(fm, &fp, &["id", "severity", "detected_by"])?;
            let fault_id = get_str(fm, "id", &fp)?;
            let severity = fm
                .get("severity")
                .and_then(Value::as_i64)
                .and_then(Severity::new)
                .ok_or_else(|| shape(&format!("{fp}.severity"), "expected an integer in 1..5"))?;
            let detected_by = fm
                .get("detected_by")
                .and_then(Value::as_array)
                .ok_or_else(|| shape(&format!("{fp}.detected_by"), "expected an array of test ids"))?
                .iter()
                .map(|id| {
                    id.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| shape(&format!("{fp}.detected_by"), "expected test id strings"))
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            faults.push(Fault {
                fault_id,
                severity,
                detected_by,
            });
        }
    }
    Ok(VersionSpec { label, faults })
}

fn parse_params(value: &Value, base_dir: Option<&Path>) -> Result<ScenarioParams, ScenarioError> {
    let path = "params";
    let map = value.as_object().ok_or_else(|| shape(path, "expected an object"))?;
    check_keys(
        map,
        path,
        &[
            "fraction",
            "fraction_basis",
            "exclude_zero_risk",
            "binning",
            "lanes",
            "risk_overhead_minutes_per_test",
            "tree",
            "seed",
        ],
    )?;
    let mut params = ScenarioParams::default();
    if let Some(v) = map.get("fraction") {
        params.fraction = get_number(v, "params.fraction")?;
    }
    if let Some(v) = map.get("fraction_basis") {
        params.fraction_basis = v
            .as_str()
            .ok_or_else(|| shape("params.fraction_basis", "expected a string"))?
            .parse()
            .map_err(|e: String| shape("params.fraction_basis", &e))?;
    }
    if let Some(v) = map.get("exclude_zero_risk") {
        params.exclude_zero_risk = v
            .as_bool()
            .ok_or_else(|| shape("params.exclude_zero_risk", "expected a boolean"))?;
    }
    if let Some(v) = map.get("binning") {
        params.binning = match v.as_str() {
            Some("scored") => BinningPopulation::Scored,
            Some("suite") => BinningPopulation::Suite,
            _ => return Err(shape("params.binning", "expected \"scored\" or \"suite\"")),
        };
    }
    if let Some(v) = map.get("lanes") {
        params.lanes = v
            .as_u64()
            .and_then(|l| u32::try_from(l).ok())
            .filter(|l| *l >= 1)
            .ok_or_else(|| shape("params.lanes", "expected an integer >= 1"))?;
    }
    if let Some(v) = map.get("risk_overhead_minutes_per_test") {
        params.risk_overhead_minutes_per_test = get_number(v, "params.risk_overhead_minutes_per_test")?;
    }
    if let Some(v) = map.get("seed") {
        params.seed = v
            .as_u64()
            .ok_or_else(|| shape("params.seed", "expected a non-negative integer"))?;
    }
    if let Some(v) = map.get("tree") {
        params.tree = match v {
            Value::String(s) if s == "default" => tree::default_tree(),
            Value::String(s) => tree::parse_tree(&read_ref(base_dir, s)?)?,
            Value::Object(_) => tree::tree_from_value(v)?,
            _ => return Err(shape("params.tree", "expected \"default\", a file path or an inline tree")),
        };
    }
    Ok(params)
}

/// Scenario document with the suite inlined; the default tree is written as `"default"`.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let num = |r: Rational| rational::to_json_number(r, true);
    let versions: Vec<Value> = scenario
        .versions
        .iter()
        .map(|v| {
            let faults: Vec<Value> = v
                .faults
                .iter()
                .map(|f| {
                    let mut m = Map::new();
                    m.insert("id".into(), Value::String(f.fault_id.clone()));
                    m.insert("severity".into(), Value::from(f.severity.get()));
                    m.insert(
                        "detected_by".into(),
                        Value::Array(f.detected_by.iter().cloned().map(Value::String).collect()),
                    );
                    Value::Object(m)
                })
                .collect();
            let mut m = Map::new();
            m.insert("label".into(), Value::String(v.label.clone()));
            m.insert("faults".into(), Value::Array(faults));
            Value::Object(m)
        })
        .collect();
    let p = &scenario.params;
    let mut params = Map::new();
    params.insert("fraction".into(), num(p.fraction));
    params.insert("fraction_basis".into(), Value::String(p.fraction_basis.as_str().into()));
    params.insert("exclude_zero_risk".into(), Value::Bool(p.exclude_zero_risk));
    params.insert(
        "binning".into(),
        Value::String(
            match p.binning {
                BinningPopulation::Scored => "scored",
                BinningPopulation::Suite => "suite",
            }
            .into(),
        ),
    );
    params.insert("lanes".into(), Value::from(p.lanes));
    params.insert(
        "risk_overhead_minutes_per_test".into(),
        num(p.risk_overhead_minutes_per_test),
    );
    let tree_value = if p.tree == tree::default_tree() {
        Value::String("default".into())
    } else {
        tree::tree_to_value(&p.tree)
    };
    params.insert("tree".into(), tree_value);
    params.insert("seed".into(), Value::from(p.seed));

    let mut root = Map::new();
    root.insert("suite".into(), suite::suite_to_value(&scenario.suite));
    root.insert("versions".into(), Value::Array(versions));
    root.insert("params".into(), Value::Object(params));
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
    text.push('\n');
    text
}
