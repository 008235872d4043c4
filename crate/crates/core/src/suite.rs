//! Test-suite data model, suite document loading and defect ingestion.
//!
//! Suite documents are JSON. Loading validates every field and reports the
//! offending test id together with a field path, e.g.
//! `tests[3] (id "1030").cost: 6 is outside 1..5`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde_json::{Map, Value};

use crate::question::{Answer, QuestionId};
use crate::rational::{self, Rational};

pub type Answers = BTreeMap<QuestionId, Answer>;

/// Consequence scale of a test, 1 (low) to 5 (high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cost(u8);

impl Cost {
    pub fn new(value: i64) -> Option<Cost> {
        (1..=5).contains(&value).then_some(Cost(value as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Defect severity, 1..5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Severity(u8);

impl Severity {
    pub fn new(value: i64) -> Option<Severity> {
        (1..=5).contains(&value).then_some(Severity(value as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TestStatus {
    #[default]
    Active,
    Obsolete,
}

impl TestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TestStatus::Active => "active",
            TestStatus::Obsolete => "obsolete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimingProfile {
    pub manual_minutes: Rational,
    pub automated_minutes: Rational,
    pub automation_deploy_minutes: Rational,
}

impl TimingProfile {
    pub fn new(manual: Rational, automated: Rational, deploy: Rational) -> Self {
        TimingProfile {
            manual_minutes: manual,
            automated_minutes: automated,
            automation_deploy_minutes: deploy,
        }
    }
}

impl Default for TimingProfile {
    fn default() -> Self {
        TimingProfile::new(Rational::ONE, Rational::ONE, Rational::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefectRecord {
    pub defect_id: String,
    pub severity: Severity,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub name: String,
    pub cost: Cost,
    pub status: TestStatus,
    pub answers: Answers,
    pub weight: Rational,
    pub timing: TimingProfile,
    pub defects: Vec<DefectRecord>,
}

impl TestCase {
    /// Active test with unit weight, default timing and no history.
    pub fn new(id: impl Into<String>, cost: Cost) -> Self {
        TestCase {
            id: id.into(),
            name: String::new(),
            cost,
            status: TestStatus::Active,
            answers: Answers::new(),
            weight: Rational::ONE,
            timing: TimingProfile::default(),
            defects: Vec::new(),
        }
    }

    pub fn is_active(&self) -> bool {
        self.status == TestStatus::Active
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSuite {
    pub name: String,
    pub tests: Vec<TestCase>,
}

/// A defect found by one test in some version, as handed to [`ingest_defects`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedDefect {
    pub test_id: String,
    pub defect_id: String,
    pub severity: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteWarning {
    pub test_id: String,
    pub message: String,
}

impl fmt::Display for SuiteWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "test {:?}: {}", self.test_id, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("malformed suite document: {0}")]
    Malformed(String),
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("{path}: unknown key")]
    UnknownKey { path: String },
    #[error("duplicate test id {id:?} ({path})")]
    DuplicateId { id: String, path: String },
    #[error("{path}: {value} is outside 1..5 (test {test:?})")]
    OutOfRange { test: String, path: String, value: String },
    #[error("{path}: unknown answer letter {value:?} (test {test:?})")]
    UnknownAnswer { test: String, path: String, value: String },
    #[error("{path}: unknown question id {value:?} (test {test:?})")]
    UnknownQuestion { test: String, path: String, value: String },
    #[error("suite has no tests")]
    Empty,
    #[error("unknown test id {0:?}")]
    UnknownTest(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Ignore keys the format does not define instead of rejecting them.
    pub lenient: bool,
}

impl TestSuite {
    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }

    /// Non-fatal findings: automated runs slower than manual ones.
    pub fn warnings(&self) -> Vec<SuiteWarning> {
        self.tests
            .iter()
            .filter(|t| t.timing.automated_minutes > t.timing.manual_minutes)
            .map(|t| SuiteWarning {
                test_id: t.id.clone(),
                message: format!(
                    "automated_minutes {} exceeds manual_minutes {}",
                    t.timing.automated_minutes, t.timing.manual_minutes
                ),
            })
            .collect()
    }
}

/// Tests with status active, in suite order.
pub fn active_tests(suite: &TestSuite) -> Vec<&TestCase> {
    suite.tests.iter().filter(|t| t.is_active()).collect()
}

pub fn load_suite(document: &str) -> Result<TestSuite, SuiteError> {
    load_suite_with(document, LoadOptions::default())
}

pub fn load_suite_with(document: &str, options: LoadOptions) -> Result<TestSuite, SuiteError> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| SuiteError::Malformed(e.to_string()))?;
    suite_from_value(&value, options)
}

/// Appends `records` (found in `version`) to the named tests.
///
/// Re-ingesting a `(defect_id, version, test id)` triple that is already
/// present is a no-op. The whole batch is validated before anything is applied.
pub fn ingest_defects(
    suite: &TestSuite,
    version: &str,
    records: &[TaggedDefect],
) -> Result<TestSuite, SuiteError> {
    let ids: HashSet<&str> = suite.tests.iter().map(|t| t.id.as_str()).collect();
    let mut checked = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if !ids.contains(rec.test_id.as_str()) {
            return Err(SuiteError::UnknownTest(rec.test_id.clone()));
        }
        let severity = Severity::new(rec.severity).ok_or_else(|| SuiteError::OutOfRange {
            test: rec.test_id.clone(),
            path: format!("records[{i}].severity"),
            value: rec.severity.to_string(),
        })?;
        checked.push((rec, severity));
    }

    let mut out = suite.clone();
    for (rec, severity) in checked {
        let test = out
            .tests
            .iter_mut()
            .find(|t| t.id == rec.test_id)
            .expect("validated above");
        let seen = test
            .defects
            .iter()
            .any(|d| d.defect_id == rec.defect_id && d.version == version);
        if !seen {
            test.defects.push(DefectRecord {
                defect_id: rec.defect_id.clone(),
                severity,
                version: version.to_string(),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Document parsing

const SUITE_KEYS: &[&str] = &["suite", "tests"];
const TEST_KEYS: &[&str] = &[
    "id", "name", "cost", "status", "answers", "weight", "timing", "defects",
];
const TIMING_KEYS: &[&str] = &["manual_minutes", "automated_minutes", "automation_deploy_minutes"];
const DEFECT_KEYS: &[&str] = &["id", "severity", "version"];

struct Ctx<'a> {
    path: String,
    test: Option<&'a str>,
    options: LoadOptions,
}

impl<'a> Ctx<'a> {
    fn child(&self, segment: &str) -> Ctx<'a> {
        let path = if self.path.is_empty() {
            segment.to_string()
        } else if segment.starts_with('[') {
            format!("{}{}", self.path, segment)
        } else {
            format!("{}.{}", self.path, segment)
        };
        Ctx {
            path,
            test: self.test,
            options: self.options,
        }
    }

    fn shape(&self, message: impl Into<String>) -> SuiteError {
        SuiteError::Shape {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn test_name(&self) -> String {
        self.test.unwrap_or("").to_string()
    }

    fn object(&self, value: &'a Value, known: &[&str]) -> Result<&'a Map<String, Value>, SuiteError> {
        let map = value.as_object().ok_or_else(|| self.shape("expected an object"))?;
        if !self.options.lenient {
            if let Some(key) = map.keys().find(|k| !known.contains(&k.as_str())) {
                return Err(SuiteError::UnknownKey {
                    path: self.child(key).path,
                });
            }
        }
        Ok(map)
    }

    fn string(&self, value: &Value) -> Result<String, SuiteError> {
        value
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| self.shape("expected a string"))
    }

    fn integer(&self, value: &Value) -> Result<i64, SuiteError> {
        match value {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    return Ok(i);
                }
                // 5.0 is accepted as 5
                let r = rational::from_json_number(n).map_err(|e| self.shape(e.to_string()))?;
                if r.denom() == 1 {
                    i64::try_from(r.numer()).map_err(|_| self.shape("integer too large"))
                } else {
                    Err(self.shape(format!("expected an integer, got {n}")))
                }
            }
            _ => Err(self.shape("expected an integer")),
        }
    }

    fn number(&self, value: &Value) -> Result<Rational, SuiteError> {
        match value {
            Value::Number(n) => rational::from_json_number(n).map_err(|e| self.shape(e.to_string())),
            _ => Err(self.shape("expected a number")),
        }
    }
}

fn required<'v>(map: &'v Map<String, Value>, ctx: &Ctx<'_>, key: &str) -> Result<&'v Value, SuiteError> {
    map.get(key)
        .ok_or_else(|| ctx.child(key).shape("missing required field"))
}

pub fn suite_from_value(value: &Value, options: LoadOptions) -> Result<TestSuite, SuiteError> {
    let root = Ctx {
        path: String::new(),
        test: None,
        options,
    };
    let map = root.object(value, SUITE_KEYS)?;
    let name = match map.get("suite") {
        Some(v) => root.child("suite").string(v)?,
        None => String::new(),
    };
    let tests_ctx = root.child("tests");
    let tests_value = required(map, &root, "tests")?;
    let items = tests_value
        .as_array()
        .ok_or_else(|| tests_ctx.shape("expected an array"))?;
    if items.is_empty() {
        return Err(SuiteError::Empty);
    }

    let mut seen: HashSet<String> = HashSet::new();
    let mut tests = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let test = parse_test(item, &tests_ctx.child(&format!("[{i}]")))?;
        if !seen.insert(test.id.clone()) {
            return Err(SuiteError::DuplicateId {
                id: test.id,
                path: format!("tests[{i}]"),
            });
        }
        tests.push(test);
    }
    Ok(TestSuite { name, tests })
}

fn parse_test(value: &Value, base: &Ctx<'_>) -> Result<TestCase, SuiteError> {
    let map = base.object(value, TEST_KEYS)?;
    let id = base.child("id").string(required(map, base, "id")?)?;
    if id.is_empty() {
        return Err(base.child("id").shape("test id must not be empty"));
    }
    let ctx = Ctx {
        path: format!("{} (id {:?})", base.path, id),
        test: Some(&id),
        options: base.options,
    };

    let name = match map.get("name") {
        Some(v) => ctx.child("name").string(v)?,
        None => String::new(),
    };

    let cost_ctx = ctx.child("cost");
    let cost_raw = cost_ctx.integer(required(map, &ctx, "cost")?)?;
    let cost = Cost::new(cost_raw).ok_or_else(|| SuiteError::OutOfRange {
        test: ctx.test_name(),
        path: cost_ctx.path.clone(),
        value: cost_raw.to_string(),
    })?;

    let status = match map.get("status") {
        None => TestStatus::Active,
        Some(v) => {
            let c = ctx.child("status");
            match c.string(v)?.as_str() {
                "active" => TestStatus::Active,
                "obsolete" => TestStatus::Obsolete,
                other => return Err(c.shape(format!("unknown status {other:?}"))),
            }
        }
    };

    let mut answers = Answers::new();
    if let Some(v) = map.get("answers") {
        let c = ctx.child("answers");
        let obj = v.as_object().ok_or_else(|| c.shape("expected an object"))?;
        for (key, letter) in obj {
            let kc = c.child(key);
            let q: QuestionId = key.parse().map_err(|_| SuiteError::UnknownQuestion {
                test: ctx.test_name(),
                path: kc.path.clone(),
                value: key.clone(),
            })?;
            let letter = kc.string(letter)?;
            let a: Answer = letter.parse().map_err(|_| SuiteError::UnknownAnswer {
                test: ctx.test_name(),
                path: kc.path.clone(),
                value: letter.clone(),
            })?;
            answers.insert(q, a);
        }
    }

    let weight = match map.get("weight") {
        None => Rational::ONE,
        Some(v) => {
            let c = ctx.child("weight");
            let w = c.number(v)?;
            if w.is_negative() {
                return Err(c.shape(format!("weight {w} must be >= 0")));
            }
            w
        }
    };

    let timing = {
        let c = ctx.child("timing");
        let obj = c.object(required(map, &ctx, "timing")?, TIMING_KEYS)?;
        let manual = c.child("manual_minutes").number(required(obj, &c, "manual_minutes")?)?;
        let automated = c
            .child("automated_minutes")
            .number(required(obj, &c, "automated_minutes")?)?;
        let deploy = match obj.get("automation_deploy_minutes") {
            Some(v) => c.child("automation_deploy_minutes").number(v)?,
            None => Rational::ZERO,
        };
        if manual <= Rational::ZERO {
            return Err(c.child("manual_minutes").shape("must be > 0"));
        }
        if automated <= Rational::ZERO {
            return Err(c.child("automated_minutes").shape("must be > 0"));
        }
        if deploy.is_negative() {
            return Err(c.child("automation_deploy_minutes").shape("must be >= 0"));
        }
        TimingProfile::new(manual, automated, deploy)
    };

    let mut defects = Vec::new();
    if let Some(v) = map.get("defects") {
        let c = ctx.child("defects");
        let arr = v.as_array().ok_or_else(|| c.shape("expected an array"))?;
        for (i, d) in arr.iter().enumerate() {
            let dc = c.child(&format!("[{i}]"));
            let obj = dc.object(d, DEFECT_KEYS)?;
            let defect_id = dc.child("id").string(required(obj, &dc, "id")?)?;
            let sc = dc.child("severity");
            let sev_raw = sc.integer(required(obj, &dc, "severity")?)?;
            let severity = Severity::new(sev_raw).ok_or_else(|| SuiteError::OutOfRange {
                test: ctx.test_name(),
                path: sc.path.clone(),
                value: sev_raw.to_string(),
            })?;
            let version = dc.child("version").string(required(obj, &dc, "version")?)?;
            defects.push(DefectRecord {
                defect_id,
                severity,
                version,
            });
        }
    }

    Ok(TestCase {
        id,
        name,
        cost,
        status,
        answers,
        weight,
        timing,
        defects,
    })
}

// ---------------------------------------------------------------------------
// Serialization

pub fn suite_to_value(suite: &TestSuite) -> Value {
    let tests: Vec<Value> = suite.tests.iter().map(test_to_value).collect();
    let mut root = Map::new();
    root.insert("suite".into(), Value::String(suite.name.clone()));
    root.insert("tests".into(), Value::Array(tests));
    Value::Object(root)
}

/// Pretty JSON document that [`load_suite`] reads back to an equal suite.
pub fn suite_to_json(suite: &TestSuite) -> String {
    let mut text = serde_json::to_string_pretty(&suite_to_value(suite)).expect("serializable");
    text.push('\n');
    text
}

fn test_to_value(t: &TestCase) -> Value {
    let num = |r: Rational| rational::to_json_number(r, true);
    let mut m = Map::new();
    m.insert("id".into(), Value::String(t.id.clone()));
    m.insert("name".into(), Value::String(t.name.clone()));
    m.insert("cost".into(), Value::from(t.cost.get()));
    m.insert("status".into(), Value::String(t.status.as_str().into()));
    let answers: Map<String, Value> = t
        .answers
        .iter()
        .map(|(q, a)| (q.to_string(), Value::String(a.letter().into())))
        .collect();
    m.insert("answers".into(), Value::Object(answers));
    m.insert("weight".into(), num(t.weight));
    let mut timing = Map::new();
    timing.insert("manual_minutes".into(), num(t.timing.manual_minutes));
    timing.insert("automated_minutes".into(), num(t.timing.automated_minutes));
    timing.insert(
        "automation_deploy_minutes".into(),
        num(t.timing.automation_deploy_minutes),
    );
    m.insert("timing".into(), Value::Object(timing));
    let defects: Vec<Value> = t
        .defects
        .iter()
        .map(|d| {
            let mut dm = Map::new();
            dm.insert("id".into(), Value::String(d.defect_id.clone()));
            dm.insert("severity".into(), Value::from(d.severity.get()));
            dm.insert("version".into(), Value::String(d.version.clone()));
            Value::Object(dm)
        })
        .collect();
    m.insert("defects".into(), Value::Array(defects));
    Value::Object(m)
}
